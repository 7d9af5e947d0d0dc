//! Small finite fields with tabulated arithmetic.
//!
//! An element of GF(p^k) is stored as the integer whose base-`p` digits are
//! its polynomial coefficients (constant term first). Extension fields use
//! the fixed reduction polynomials in [`REDUCTION_POLYNOMIALS`].

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("no reduction polynomial is tabulated for GF({0})")]
    Unsupported(usize),
}

/// `(p, k, coefficients of the monic polynomial below x^k, constant first)`.
///
/// - GF(9):   x^2 + 1
/// - GF(25):  x^2 + x + 2
/// - GF(27):  x^3 + 2x + 1
/// - GF(49):  x^2 + 1
/// - GF(81):  x^4 + x + 2
/// - GF(121): x^2 + 1
/// - GF(125): x^3 + x + 1
/// - GF(169): x^2 + x + 2
pub const REDUCTION_POLYNOMIALS: &[(usize, usize, &[usize])] = &[
    (3, 2, &[1, 0]),
    (5, 2, &[2, 1]),
    (3, 3, &[1, 2, 0]),
    (7, 2, &[1, 0]),
    (3, 4, &[2, 1, 0, 0]),
    (11, 2, &[1, 0]),
    (5, 3, &[1, 1, 0]),
    (13, 2, &[2, 1]),
];

pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut k = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

#[derive(Clone, Debug)]
pub struct FiniteField {
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    square: Vec<bool>,
}

impl FiniteField {
    pub fn new(q: usize) -> Result<Self, FieldError> {
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let reduction: Vec<usize> = if k == 1 {
            Vec::new()
        } else {
            REDUCTION_POLYNOMIALS
                .iter()
                .find(|(pp, kk, _)| *pp == p && *kk == k)
                .map(|(_, _, c)| c.to_vec())
                .ok_or(FieldError::Unsupported(q))?
        };
        let digits = |mut x: usize| -> Vec<usize> {
            (0..k)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let pack = |d: &[usize]| -> usize { d.iter().rev().fold(0, |acc, &c| acc * p + c) };
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = pack(&sum) as u16;
                // schoolbook product, then reduce x^k = -(c_0 + c_1 x + ...)
                let mut prod = vec![0usize; 2 * k];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for deg in (k..2 * k).rev() {
                    let c = prod[deg];
                    if c == 0 {
                        continue;
                    }
                    prod[deg] = 0;
                    for (i, r) in reduction.iter().enumerate() {
                        let t = prod[deg - k + i] + (p - (c * r) % p);
                        prod[deg - k + i] = t % p;
                    }
                }
                mul[a * q + b] = pack(&prod[..k]) as u16;
            }
        }
        let mut neg = vec![0u16; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u16;
        }
        let mut square = vec![false; q];
        for a in 1..q {
            square[mul[a * q + a] as usize] = true;
        }
        Ok(Self { q, add, mul, neg, square })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b] as usize)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    /// Quadratic character: 0 at 0, 1 on nonzero squares, -1 elsewhere.
    pub fn chi(&self, a: usize) -> i8 {
        if a == 0 {
            0
        } else if self.square[a] {
            1
        } else {
            -1
        }
    }

    /// True when every nonzero element has a multiplicative inverse.
    pub fn is_field(&self) -> bool {
        (1..self.q).all(|a| (1..self.q).any(|b| self.mul(a, b) == 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(19), Some((19, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn tabulated_fields_are_fields() {
        for &(p, k, _) in REDUCTION_POLYNOMIALS {
            let q = p.pow(k as u32);
            let f = FiniteField::new(q).unwrap();
            assert!(f.is_field(), "GF({q})");
            let squares = (1..q).filter(|&a| f.chi(a) == 1).count();
            assert_eq!(squares, (q - 1) / 2);
        }
        for q in [3, 7, 11, 13, 17, 19, 23, 31] {
            assert!(FiniteField::new(q).unwrap().is_field());
        }
    }

    #[test]
    fn minus_one_is_square_iff_q_is_1_mod_4() {
        for q in [3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27] {
            let f = FiniteField::new(q).unwrap();
            let minus_one = f.sub(0, 1);
            assert_eq!(f.chi(minus_one) == 1, q % 4 == 1, "q={q}");
        }
    }

    #[test]
    fn unsupported_and_invalid() {
        assert_eq!(FiniteField::new(15).unwrap_err(), FieldError::NotPrimePower(15));
        assert_eq!(FiniteField::new(243).unwrap_err(), FieldError::Unsupported(243));
    }
}
