//! Binary codes spanned by the rows or columns of a normalized Hadamard matrix.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::matrix::{words_for, word_mask, HadamardMatrix};
use crate::structure::Axis;

/// Largest dimension for which the full weight enumerator is computed.
pub const ENUMERATOR_DIMENSION_CAP: usize = 26;

/// A binary linear code of length `n`, stored as a reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    n: usize,
    stride: usize,
    basis: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

fn bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn weight(v: &[u64]) -> usize {
    v.iter().map(|w| w.count_ones() as usize).sum()
}

impl BinaryCode {
    pub fn from_generators(n: usize, generators: impl IntoIterator<Item = Vec<u64>>) -> BinaryCode {
        let stride = words_for(n);
        let mut code = BinaryCode {
            n,
            stride,
            basis: Vec::new(),
            pivots: Vec::new(),
        };
        for g in generators {
            code.insert(g);
        }
        code
    }

    /// Adds a vector to the span; returns whether the dimension grew.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        assert_eq!(v.len(), self.stride, "vector length");
        self.reduce_in_place(&mut v);
        let Some(p) = (0..self.n).find(|&i| bit(&v, i)) else {
            return false;
        };
        for b in &mut self.basis {
            if bit(b, p) {
                xor_into(b, &v);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.basis.insert(at, v);
        true
    }

    fn reduce_in_place(&self, v: &mut [u64]) {
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if bit(v, p) {
                xor_into(v, b);
            }
        }
    }

    /// Coset representative of `v`: zero at every pivot, linear in `v`.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut out = v.to_vec();
        self.reduce_in_place(&mut out);
        out
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&w| w == 0)
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn unit_vector(&self, i: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.stride];
        v[i / 64] |= 1 << (i % 64);
        v
    }

    pub fn indicator(&self, support: &[usize]) -> Vec<u64> {
        let mut v = vec![0u64; self.stride];
        for &i in support {
            v[i / 64] ^= 1 << (i % 64);
        }
        v
    }

    pub fn is_subcode_of(&self, other: &BinaryCode) -> bool {
        self.n == other.n && self.basis.iter().all(|b| other.contains(b))
    }

    pub fn is_self_orthogonal(&self) -> bool {
        self.basis.iter().enumerate().all(|(i, a)| {
            self.basis[i..]
                .iter()
                .all(|b| a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() % 2 == 0)
        })
    }

    pub fn is_self_dual(&self) -> bool {
        2 * self.dimension() == self.n && self.is_self_orthogonal()
    }

    /// Number of codewords of each weight, or `None` above the dimension cap.
    pub fn weight_enumerator(&self) -> Option<BTreeMap<usize, u64>> {
        let k = self.dimension();
        if k > ENUMERATOR_DIMENSION_CAP {
            return None;
        }
        let mut counts = vec![0u64; self.n + 1];
        let mut word = vec![0u64; self.stride];
        counts[0] = 1;
        for step in 1u64..(1u64 << k) {
            // Gray code: flip the basis vector at the lowest set bit of step
            xor_into(&mut word, &self.basis[step.trailing_zeros() as usize]);
            counts[weight(&word)] += 1;
        }
        Some(counts.into_iter().enumerate().filter(|(_, c)| *c > 0).collect())
    }

    /// Supports of the weight-4 codewords, sorted.
    ///
    /// `e_a + e_b + e_c + e_d` lies in the code exactly when the coset
    /// representatives of `e_a + e_b` and `e_c + e_d` coincide, so pairs are
    /// bucketed by that representative and disjoint pairs joined.
    pub fn weight4_supports(&self) -> Vec<[usize; 4]> {
        let units: Vec<Vec<u64>> = (0..self.n).map(|i| self.reduce(&self.unit_vector(i))).collect();
        let mut buckets: HashMap<Vec<u64>, Vec<(usize, usize)>> = HashMap::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                let key: Vec<u64> = units[a].iter().zip(&units[b]).map(|(x, y)| x ^ y).collect();
                buckets.entry(key).or_default().push((a, b));
            }
        }
        let mut found = HashSet::new();
        for pairs in buckets.values() {
            for (x, &(a, b)) in pairs.iter().enumerate() {
                for &(c, d) in &pairs[x + 1..] {
                    if a != c && a != d && b != c && b != d {
                        let mut s = [a, b, c, d];
                        s.sort_unstable();
                        found.insert(s);
                    }
                }
            }
        }
        let mut out: Vec<[usize; 4]> = found.into_iter().collect();
        out.sort_unstable();
        out
    }

    pub fn summary(&self) -> BinaryCodeSummary {
        let weight_enumerator = self.weight_enumerator();
        let weight4_count = match &weight_enumerator {
            Some(e) => e.get(&4).copied().unwrap_or(0) as usize,
            None => self.weight4_supports().len(),
        };
        BinaryCodeSummary {
            dimension: self.dimension(),
            self_orthogonal: self.is_self_orthogonal(),
            self_dual: self.is_self_dual(),
            weight4_count,
            weight_enumerator,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCodeSummary {
    pub dimension: usize,
    pub self_orthogonal: bool,
    pub self_dual: bool,
    pub weight4_count: usize,
    pub weight_enumerator: Option<BTreeMap<usize, u64>>,
}

/// Span of the rows after negating columns so row 0 is all `+1`, with `-1`
/// written as 0. A bit is therefore set where a row agrees with row 0.
pub fn row_code(m: &HadamardMatrix) -> BinaryCode {
    let n = m.order();
    let first = m.row_words(0).to_vec();
    let gens = (0..n).map(|i| {
        m.row_words(i)
            .iter()
            .zip(&first)
            .enumerate()
            .map(|(w, (x, y))| !(x ^ y) & word_mask(n, w))
            .collect::<Vec<u64>>()
    });
    BinaryCode::from_generators(n, gens)
}

/// The row code or, for [`Axis::Columns`], the span of the columns
/// (the row code of the transpose).
pub fn binary_code(m: &HadamardMatrix, axis: Axis) -> BinaryCode {
    row_code(&axis.view(m))
}

pub fn binary_code_summary(m: &HadamardMatrix, axis: Axis) -> BinaryCodeSummary {
    binary_code(m, axis).summary()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{paley, sylvester, PaleyKind};

    fn brute_words(code: &BinaryCode) -> Vec<Vec<u64>> {
        let k = code.dimension();
        (0u64..1 << k)
            .map(|mask| {
                let mut w = vec![0u64; code.stride];
                for (i, b) in code.basis().iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        xor_into(&mut w, b);
                    }
                }
                w
            })
            .collect()
    }

    #[test]
    fn rref_basics() {
        let mut c = BinaryCode::from_generators(5, vec![vec![0b00011], vec![0b00110], vec![0b00101]]);
        assert_eq!(c.dimension(), 2);
        assert!(c.contains(&[0b00101]));
        assert!(!c.contains(&[0b10000]));
        assert!(c.insert(vec![0b10000]));
        assert!(!c.insert(vec![0b10011]));
        assert_eq!(c.dimension(), 3);
    }

    #[test]
    fn enumerator_matches_brute_force() {
        for m in [sylvester(4), paley(11, PaleyKind::One).unwrap(), paley(19, PaleyKind::One).unwrap()] {
            for axis in [Axis::Rows, Axis::Columns] {
                let code = binary_code(&m, axis);
                if code.dimension() > 14 {
                    continue;
                }
                let mut counts = BTreeMap::new();
                let words = brute_words(&code);
                for w in &words {
                    *counts.entry(weight(w)).or_insert(0u64) += 1;
                }
                assert_eq!(code.weight_enumerator().unwrap(), counts);
                let mut supports: Vec<[usize; 4]> = words
                    .iter()
                    .filter(|w| weight(w) == 4)
                    .map(|w| {
                        let v: Vec<usize> = (0..code.length()).filter(|&i| bit(w, i)).collect();
                        [v[0], v[1], v[2], v[3]]
                    })
                    .collect();
                supports.sort_unstable();
                assert_eq!(code.weight4_supports(), supports);
            }
        }
    }

    #[test]
    fn dimensions_by_order() {
        // Sylvester 16 spans the first-order Reed-Muller code RM(1,4)
        let s = binary_code_summary(&sylvester(4), Axis::Rows);
        assert_eq!(s.dimension, 5);
        assert!(s.self_orthogonal && !s.self_dual);
        let p24 = binary_code_summary(&paley(23, PaleyKind::One).unwrap(), Axis::Columns);
        assert_eq!(p24.dimension, 12);
        assert!(p24.self_dual);
        assert_eq!(p24.weight4_count, 0);
        let e = p24.weight_enumerator.unwrap();
        assert!(e.keys().all(|w| w % 4 == 0));
        assert!(e.iter().all(|(w, c)| e.get(&(24 - w)) == Some(c)));
        let p20 = binary_code_summary(&paley(19, PaleyKind::One).unwrap(), Axis::Rows);
        assert_eq!(p20.dimension, 19);
        assert!(!p20.self_orthogonal);
        let p36 = binary_code_summary(&paley(17, PaleyKind::Two).unwrap(), Axis::Rows);
        assert_eq!(p36.dimension, 35);
        assert!(p36.weight_enumerator.is_none());
    }
}
