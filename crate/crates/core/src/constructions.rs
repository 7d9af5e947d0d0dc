//! Seed matrices: Sylvester, Paley I/II and the doubling constructions.

use thiserror::Error;

use crate::gf::{FieldError, FiniteField};
use crate::matrix::{HadamardMatrix, MatrixError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("Paley {kind:?} needs q = {needed} (mod 4), got q = {q}")]
    WrongResidue { q: usize, kind: PaleyKind, needed: usize },
    #[error("doubling needs equal orders, got {0} and {1}")]
    OrderMismatch(usize, usize),
    #[error("permutation has length {found}, expected {expected}")]
    PermutationLength { expected: usize, found: usize },
    #[error("not a permutation: {0:?}")]
    NotPermutation(Vec<usize>),
    #[error("input matrix is not Hadamard")]
    NotHadamard,
    #[error("Sylvester exponent {0} is too large")]
    ExponentTooLarge(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaleyKind {
    /// Order q + 1, for q = 3 (mod 4).
    One,
    /// Order 2(q + 1), for q = 1 (mod 4).
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoublingShape {
    /// `[[A, PB], [A, -PB]]`
    Stacked,
    /// `[[A, A], [BP, -BP]]`
    SideBySide,
}

/// Which seed to build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstructionSpec {
    Sylvester(u32),
    Paley { q: usize, kind: PaleyKind },
    Double {
        a: HadamardMatrix,
        b: HadamardMatrix,
        permutation: Option<Vec<usize>>,
        shape: DoublingShape,
    },
    File(std::path::PathBuf),
}

#[derive(Debug, Error)]
pub enum SeedError {
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("reading {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl ConstructionSpec {
    pub fn build(&self) -> Result<HadamardMatrix, SeedError> {
        Ok(match self {
            ConstructionSpec::Sylvester(k) => {
                if *k > 12 {
                    return Err(ConstructionError::ExponentTooLarge(*k).into());
                }
                sylvester(*k)
            }
            ConstructionSpec::Paley { q, kind } => paley(*q, *kind)?,
            ConstructionSpec::Double { a, b, permutation, shape } => {
                let p = permutation.clone().unwrap_or_else(|| (0..a.order()).collect());
                double(a, b, &p, *shape)?
            }
            ConstructionSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| SeedError::Io {
                    path: path.clone(),
                    source,
                })?;
                load_seed(&text)?
            }
        })
    }
}

/// Parses a `.had` seed and rejects it unless it is a Hadamard matrix.
pub fn load_seed(text: &str) -> Result<HadamardMatrix, ConstructionError> {
    let m = HadamardMatrix::parse_had(text)?;
    if !m.verify() {
        return Err(ConstructionError::NotHadamard);
    }
    Ok(m)
}

/// Entry `(i, j)` is `(-1)^popcount(i & j)`.
pub fn sylvester(k: u32) -> HadamardMatrix {
    let n = 1usize << k;
    HadamardMatrix::from_fn(n, |i, j| (i & j).count_ones() % 2 == 0).expect("order is positive")
}

/// Jacobsthal matrix `Q[a][b] = chi(a - b)` over GF(q).
fn jacobsthal(field: &FiniteField) -> Vec<Vec<i8>> {
    let q = field.order();
    (0..q)
        .map(|a| (0..q).map(|b| field.chi(field.sub(a, b))).collect())
        .collect()
}

/// Paley matrices.
///
/// Type I: `I + S` with `S = [[0, j^T], [-j, Q]]`, then rows 1..q negated so
/// the first row and column are all `+1`. Type II: the symmetric conference
/// matrix `C = [[0, j^T], [j, Q]]` with each 0 replaced by `[[1,-1],[-1,-1]]`
/// and each `±1` by `±[[1,1],[1,-1]]`.
pub fn paley(q: usize, kind: PaleyKind) -> Result<HadamardMatrix, ConstructionError> {
    let needed = match kind {
        PaleyKind::One => 3,
        PaleyKind::Two => 1,
    };
    if q % 4 != needed {
        return Err(ConstructionError::WrongResidue { q, kind, needed });
    }
    let field = FiniteField::new(q)?;
    let jac = jacobsthal(&field);
    let m = q + 1;
    // core matrix of order q + 1 with the border row/column attached
    let core = |i: usize, j: usize| -> i8 {
        match (i, j) {
            (0, 0) => 0,
            (0, _) => 1,
            (_, 0) => {
                if kind == PaleyKind::One {
                    -1
                } else {
                    1
                }
            }
            _ => jac[i - 1][j - 1],
        }
    };
    let h = match kind {
        PaleyKind::One => HadamardMatrix::from_fn(m, |i, j| {
            let v = core(i, j) + if i == j { 1 } else { 0 };
            let v = if i > 0 { -v } else { v };
            v > 0
        })?,
        PaleyKind::Two => HadamardMatrix::from_fn(2 * m, |r, c| {
            let (i, a) = (r / 2, r % 2);
            let (j, b) = (c / 2, c % 2);
            match core(i, j) {
                0 => a == 0 && b == 0,
                v => {
                    let unit = if a == 1 && b == 1 { -1 } else { 1 };
                    v * unit > 0
                }
            }
        })?,
    };
    debug_assert!(h.is_hadamard());
    Ok(h)
}

fn check_permutation(p: &[usize], n: usize) -> Result<(), ConstructionError> {
    if p.len() != n {
        return Err(ConstructionError::PermutationLength { expected: n, found: p.len() });
    }
    let mut seen = vec![false; n];
    for &x in p {
        if x >= n || std::mem::replace(&mut seen[x], true) {
            return Err(ConstructionError::NotPermutation(p.to_vec()));
        }
    }
    Ok(())
}

/// Builds an order-2n matrix from two order-n matrices.
///
/// `p` is the permutation with `P[i][p[i]] = 1`, so row `i` of `PB` is row
/// `p[i]` of `B` and column `p[k]` of `BP` is column `k` of `B`.
pub fn double(a: &HadamardMatrix, b: &HadamardMatrix, p: &[usize], shape: DoublingShape) -> Result<HadamardMatrix, ConstructionError> {
    let n = a.order();
    if b.order() != n {
        return Err(ConstructionError::OrderMismatch(n, b.order()));
    }
    check_permutation(p, n)?;
    let mut p_inv = vec![0; n];
    for (i, &x) in p.iter().enumerate() {
        p_inv[x] = i;
    }
    let m = HadamardMatrix::from_fn(2 * n, |r, c| match shape {
        DoublingShape::Stacked => {
            let (i, top) = (r % n, r < n);
            if c < n {
                a.is_plus(i, c)
            } else {
                b.is_plus(p[i], c - n) == top
            }
        }
        DoublingShape::SideBySide => {
            let j = c % n;
            if r < n {
                a.is_plus(r, j)
            } else {
                b.is_plus(r - n, p_inv[j]) == (c < n)
            }
        }
    })?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sylvester_small() {
        assert_eq!(sylvester(1).to_signs(), vec![vec![1, 1], vec![1, -1]]);
        assert_eq!(sylvester(0).order(), 1);
        for k in 0..=6 {
            assert!(sylvester(k).verify());
        }
        assert!(sylvester(3).is_symmetric());
    }

    #[test]
    fn paley_orders_and_validity() {
        for q in [3, 7, 11, 19, 23, 27, 31, 43] {
            let h = paley(q, PaleyKind::One).unwrap();
            assert_eq!(h.order(), q + 1);
            assert!(h.verify(), "paley I q={q}");
            assert!((0..h.order()).all(|j| h.get(0, j) == 1 && h.get(j, 0) == 1));
        }
        for q in [5, 9, 13, 17, 25] {
            let h = paley(q, PaleyKind::Two).unwrap();
            assert_eq!(h.order(), 2 * (q + 1));
            assert!(h.verify(), "paley II q={q}");
        }
    }

    #[test]
    fn paley_rejects_bad_parameters() {
        assert!(matches!(paley(13, PaleyKind::One), Err(ConstructionError::WrongResidue { .. })));
        assert!(matches!(paley(7, PaleyKind::Two), Err(ConstructionError::WrongResidue { .. })));
        assert!(matches!(paley(15, PaleyKind::One), Err(ConstructionError::Field(_))));
    }

    #[test]
    fn doubling_layout() {
        let a = sylvester(3);
        let b = paley(7, PaleyKind::One).unwrap();
        let p = vec![3, 1, 4, 0, 7, 6, 2, 5];
        let h = double(&a, &b, &p, DoublingShape::Stacked).unwrap();
        assert!(h.verify());
        for i in 0..8 {
            for c in 0..8 {
                assert_eq!(h.get(i, c), h.get(i + 8, c));
                assert_eq!(h.get(i, c + 8), b.get(p[i], c));
                assert_eq!(h.get(i + 8, c + 8), -b.get(p[i], c));
            }
        }
        let t = double(&a, &b, &p, DoublingShape::SideBySide).unwrap();
        assert!(t.verify());
        for r in 0..8 {
            for k in 0..8 {
                assert_eq!(t.get(r + 8, p[k]), b.get(r, k));
                assert_eq!(t.get(r + 8, p[k] + 8), -b.get(r, k));
            }
        }
        assert!(double(&a, &sylvester(2), &[0, 1, 2, 3], DoublingShape::Stacked).is_err());
        assert!(double(&a, &b, &[0, 0, 1, 2, 3, 4, 5, 6], DoublingShape::Stacked).is_err());
    }

    #[test]
    fn seed_loading_rejects_non_hadamard() {
        assert!(load_seed("2\n++\n++\n").is_err());
        assert_eq!(load_seed(&sylvester(2).to_had_string()).unwrap(), sylvester(2));
    }
}
