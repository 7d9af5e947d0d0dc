//! Smith normal form over exact integers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::InvariantError;
use crate::matrix::HadamardMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithForm {
    /// Invariant factors `s_1 | s_2 | ...`, zeros last.
    pub factors: Vec<BigUint>,
    /// Number of factors equal to 2, filled in for order-36 Hadamard matrices.
    pub smith_alpha: Option<usize>,
}

impl SmithForm {
    /// The factors as `u64`, or `None` if one does not fit.
    pub fn factors_u64(&self) -> Option<Vec<u64>> {
        self.factors.iter().map(|f| u64::try_from(f).ok()).collect()
    }

    pub fn divisibility_holds(&self) -> bool {
        self.factors.windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                (&w[1] % &w[0]).is_zero()
            }
        })
    }

    /// `s_1 = 1` and `s_i s_{n+1-i} = n`.
    pub fn hadamard_duality_holds(&self) -> bool {
        let n = self.factors.len();
        let nn = BigUint::from(n);
        !self.factors.is_empty()
            && self.factors[0] == BigUint::from(1u32)
            && (0..n).all(|i| &self.factors[i] * &self.factors[n - 1 - i] == nn)
    }

    pub fn count_equal(&self, v: u64) -> usize {
        let v = BigUint::from(v);
        self.factors.iter().filter(|f| **f == v).count()
    }
}

fn find_pivot(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
                if x.abs() == BigInt::from(1) {
                    return best;
                }
            }
        }
    }
    best
}

/// Invariant factors of a square integer matrix.
///
/// Elimination with the smallest nonzero entry as pivot; after clearing the
/// pivot row and column, a remaining entry not divisible by the pivot is
/// added into the pivot row and the step repeats.
pub fn smith_normal_form(rows: &[Vec<i64>]) -> Result<SmithForm, InvariantError> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(InvariantError::NotSquare { rows: n, cols: r.len() });
    }
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut factors = Vec::with_capacity(n);
    for t in 0..n {
        let Some(_) = find_pivot(&a, t) else {
            factors.extend(std::iter::repeat_n(BigUint::zero(), n - t));
            break;
        };
        loop {
            let (pi, pj) = find_pivot(&a, t).expect("submatrix is nonzero");
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t].clone();
            let mut dirty = false;
            for i in t + 1..n {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&p);
                for j in t..n {
                    let d = &q * &a[t][j];
                    a[i][j] -= d;
                }
                dirty |= !a[i][t].is_zero();
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&p);
                for row in a.iter_mut().skip(t) {
                    let d = &q * &row[t];
                    row[j] -= d;
                }
                dirty |= !a[t][j].is_zero();
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| !(&a[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..n {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        factors.push(a[t][t].abs().to_biguint().expect("absolute value"));
    }
    Ok(SmithForm {
        factors,
        smith_alpha: None,
    })
}

/// Smith form of a Hadamard matrix; `smith_alpha` is set at order 36 when
/// the factors follow `(1, 2^α, 6^(34-2α), 18^α, 36)`.
pub fn hadamard_smith_form(m: &HadamardMatrix) -> SmithForm {
    let rows: Vec<Vec<i64>> = m.to_signs().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect();
    let mut form = smith_normal_form(&rows).expect("Hadamard matrices are square");
    if m.order() == 36 {
        form.smith_alpha = alpha_from_pattern(&form);
    }
    form
}

fn alpha_from_pattern(form: &SmithForm) -> Option<usize> {
    let f = form.factors_u64()?;
    if f.len() != 36 {
        return None;
    }
    let alpha = f.iter().filter(|&&x| x == 2).count();
    if alpha > 17 {
        return None;
    }
    let expected = std::iter::once(1)
        .chain(std::iter::repeat_n(2, alpha))
        .chain(std::iter::repeat_n(6, 34 - 2 * alpha))
        .chain(std::iter::repeat_n(18, alpha))
        .chain(std::iter::once(36));
    expected.eq(f.iter().copied()).then_some(alpha)
}

/// The Smith class `α` of an order-36 Hadamard matrix.
pub fn smith_class(m: &HadamardMatrix) -> Result<usize, InvariantError> {
    if m.order() != 36 {
        return Err(InvariantError::WrongOrder { expected: 36, found: m.order() });
    }
    let form = hadamard_smith_form(m);
    form.smith_alpha
        .filter(|a| (6..=17).contains(a))
        .ok_or_else(|| InvariantError::SmithPattern(form.factors.iter().map(|f| f.to_string()).collect()))
}
