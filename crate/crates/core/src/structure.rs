//! Field partitions, quadruple types, closed quadruples and Hall sets.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{word_mask, HadamardMatrix, MatrixError, SignVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("field {field} has {found} columns, expected {expected}; the input is not a Hadamard matrix")]
    UnevenField { field: usize, found: usize, expected: usize },
    #[error("order {0} is not a multiple of 4")]
    OrderNotMultipleOfFour(usize),
    #[error("minority count {0} is not a multiple of 4; the input is not a Hadamard matrix")]
    BadMinority(usize),
}

/// Which lines a quadruple is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Rows,
    Columns,
}

impl Axis {
    /// The matrix whose rows are the lines of this axis.
    pub fn view(self, m: &HadamardMatrix) -> std::borrow::Cow<'_, HadamardMatrix> {
        match self {
            Axis::Rows => std::borrow::Cow::Borrowed(m),
            Axis::Columns => std::borrow::Cow::Owned(m.transpose()),
        }
    }
}

/// The four column classes induced by three rows.
///
/// Field `f` (0-based) collects the columns `c` whose pair products
/// `(h[j][c]·h[k][c], h[j][c]·h[l][c])` equal, in order, `(+,+)`, `(-,+)`,
/// `(+,-)`, `(-,-)`. The classes do not change under column negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldPartition {
    pub defining_rows: [usize; 3],
    pub fields: [Vec<usize>; 4],
    masks: [Vec<u64>; 4],
}

impl FieldPartition {
    /// Packed column mask of field `f` (0-based).
    pub fn mask(&self, f: usize) -> &[u64] {
        &self.masks[f]
    }

    /// 0-based field index containing `col`.
    pub fn field_of(&self, col: usize) -> usize {
        (0..4)
            .find(|&f| self.masks[f][col / 64] >> (col % 64) & 1 == 1)
            .expect("fields cover every column")
    }
}

/// Type data for four rows (or columns).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleInfo {
    pub indices: [usize; 4],
    pub axis: Axis,
    /// `r` such that the product of the four lines has `4r` minority-sign entries.
    pub type_r: usize,
    /// For a type-1 quadruple with an unambiguous minority (order above 8):
    /// the four minority positions, listed in field order. For a column
    /// quadruple these positions are row indices.
    pub hall_columns: Option<[usize; 4]>,
}

impl QuadrupleInfo {
    pub fn is_closed(&self) -> bool {
        self.type_r == 0
    }
}

/// Negates columns so that the product of the three chosen rows is all `+1`.
/// Returns the normalized matrix and the column signs that were applied.
pub fn three_normalize(m: &HadamardMatrix, rows: [usize; 3]) -> Result<(HadamardMatrix, Vec<i8>), StructureError> {
    let product = m.hadamard_product(&rows)?;
    let signs = product.to_signs();
    let mask: Vec<u64> = product.negated().words().to_vec();
    let all: Vec<usize> = (0..m.order()).collect();
    Ok((m.with_block_negated(&all, &mask), signs))
}

pub fn field_partition(m: &HadamardMatrix, rows: [usize; 3]) -> Result<FieldPartition, StructureError> {
    m.check_indices(&rows)?;
    let n = m.order();
    if n % 4 != 0 {
        return Err(StructureError::OrderNotMultipleOfFour(n));
    }
    let [j, k, l] = rows;
    let (rj, rk, rl) = (m.row_words(j), m.row_words(k), m.row_words(l));
    let stride = rj.len();
    let mut masks: [Vec<u64>; 4] = Default::default();
    for mask in masks.iter_mut() {
        mask.reserve(stride);
    }
    for w in 0..stride {
        let full = word_mask(n, w);
        let a = !(rj[w] ^ rk[w]) & full;
        let b = !(rj[w] ^ rl[w]) & full;
        masks[0].push(a & b);
        masks[1].push(!a & b & full);
        masks[2].push(a & !b & full);
        masks[3].push(!a & !b & full);
    }
    let mut fields: [Vec<usize>; 4] = Default::default();
    for f in 0..4 {
        fields[f] = (0..n).filter(|&c| masks[f][c / 64] >> (c % 64) & 1 == 1).collect();
        if fields[f].len() != n / 4 {
            return Err(StructureError::UnevenField {
                field: f + 1,
                found: fields[f].len(),
                expected: n / 4,
            });
        }
    }
    Ok(FieldPartition {
        defining_rows: rows,
        fields,
        masks,
    })
}

fn minority_of(product: &SignVector) -> (usize, bool) {
    let minus = product.count_minus();
    let plus = product.len() - minus;
    if minus <= plus {
        (minus, false)
    } else {
        (plus, true)
    }
}

fn sorted4(idx: [usize; 4]) -> [usize; 4] {
    let mut s = idx;
    s.sort_unstable();
    s
}

/// Types the quadruple in a matrix whose rows are the lines of interest.
fn type_in_rows(rows_view: &HadamardMatrix, indices: [usize; 4], axis: Axis) -> Result<QuadrupleInfo, StructureError> {
    let n = rows_view.order();
    let product = rows_view.hadamard_product(&indices)?;
    let (minority, minority_is_plus) = minority_of(&product);
    if minority % 4 != 0 {
        return Err(StructureError::BadMinority(minority));
    }
    let type_r = minority / 4;
    let hall_columns = if type_r == 1 && minority * 2 < n {
        let positions = if minority_is_plus {
            product.plus_positions()
        } else {
            product.minus_positions()
        };
        let s = sorted4(indices);
        let mut hall = [positions[0], positions[1], positions[2], positions[3]];
        if let Ok(fp) = field_partition(rows_view, [s[0], s[1], s[2]]) {
            hall.sort_by_key(|&c| (fp.field_of(c), c));
        }
        Some(hall)
    } else {
        None
    };
    Ok(QuadrupleInfo {
        indices,
        axis,
        type_r,
        hall_columns,
    })
}

pub fn quadruple_type(m: &HadamardMatrix, indices: [usize; 4], axis: Axis) -> Result<QuadrupleInfo, StructureError> {
    type_in_rows(&axis.view(m), indices, axis)
}

/// Normalizes a pair product up to global sign: bit 0 is forced to `+1`.
fn pair_key(a: &[u64], b: &[u64], n: usize) -> Vec<u64> {
    let flip = (a[0] ^ b[0]) & 1 == 1;
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(w, (x, y))| {
            let p = !(x ^ y);
            (if flip { !p } else { p }) & word_mask(n, w)
        })
        .collect()
}

/// All closed quadruples on `axis`, each listed once in lexicographic order.
///
/// Rows `i<j<k<l` are closed exactly when the pair products `h_i∘h_j` and
/// `h_k∘h_l` agree up to sign, so pairs are bucketed by that product and
/// disjoint pairs inside a bucket are joined.
pub fn find_closed_quadruples(m: &HadamardMatrix, axis: Axis) -> Vec<QuadrupleInfo> {
    closed_quadruple_indices(&axis.view(m))
        .into_iter()
        .map(|indices| QuadrupleInfo {
            indices,
            axis,
            type_r: 0,
            hall_columns: None,
        })
        .collect()
}

pub(crate) fn closed_quadruple_indices(rows_view: &HadamardMatrix) -> Vec<[usize; 4]> {
    let n = rows_view.order();
    let mut buckets: HashMap<Vec<u64>, Vec<(usize, usize)>> = HashMap::new();
    for i in 0..n {
        for j in i + 1..n {
            buckets
                .entry(pair_key(rows_view.row_words(i), rows_view.row_words(j), n))
                .or_default()
                .push((i, j));
        }
    }
    let mut out = Vec::new();
    for pairs in buckets.values() {
        for (x, &(i, j)) in pairs.iter().enumerate() {
            for &(k, l) in &pairs[x + 1..] {
                if j < k {
                    out.push([i, j, k, l]);
                } else if l < i {
                    out.push([k, l, i, j]);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Number of closed quadruples on `axis`.
pub fn count_closed_quadruples(m: &HadamardMatrix, axis: Axis) -> usize {
    closed_quadruple_indices(&axis.view(m)).len()
}

/// Visits every 4-subset `a<b<c<d` of lines with the packed product of the four.
fn for_each_quadruple(rows_view: &HadamardMatrix, mut visit: impl FnMut([usize; 4], &[u64])) {
    let n = rows_view.order();
    let s = rows_view.stride();
    let mut ab = vec![0u64; s];
    let mut abc = vec![0u64; s];
    let mut abcd = vec![0u64; s];
    for a in 0..n {
        for b in a + 1..n {
            for w in 0..s {
                ab[w] = !(rows_view.row_words(a)[w] ^ rows_view.row_words(b)[w]);
            }
            for c in b + 1..n {
                for w in 0..s {
                    abc[w] = !(ab[w] ^ rows_view.row_words(c)[w]);
                }
                for d in c + 1..n {
                    let rd = rows_view.row_words(d);
                    for w in 0..s {
                        abcd[w] = !(abc[w] ^ rd[w]) & word_mask(n, w);
                    }
                    visit([a, b, c, d], &abcd);
                }
            }
        }
    }
}

/// All type-1 quadruples on `axis` with their Hall columns.
///
/// Returns an empty list for orders of 8 and below, where a type-1 product is
/// balanced and the four distinguished positions are undefined.
pub fn find_hall_sets(m: &HadamardMatrix, axis: Axis) -> Vec<QuadrupleInfo> {
    let view = axis.view(m);
    let n = view.order();
    if n <= 8 {
        return Vec::new();
    }
    let mut found = Vec::new();
    for_each_quadruple(&view, |idx, prod| {
        let plus: usize = prod.iter().map(|w| w.count_ones() as usize).sum();
        if plus == 4 || n - plus == 4 {
            found.push(idx);
        }
    });
    found
        .into_iter()
        .filter_map(|idx| type_in_rows(&view, idx, axis).ok())
        .collect()
}

/// Histogram `r -> number of quadruples of type r` over all 4-subsets.
pub fn type_histogram(m: &HadamardMatrix, axis: Axis) -> BTreeMap<usize, usize> {
    let view = axis.view(m);
    let n = view.order();
    let mut hist = BTreeMap::new();
    for_each_quadruple(&view, |_, prod| {
        let plus: usize = prod.iter().map(|w| w.count_ones() as usize).sum();
        *hist.entry(plus.min(n - plus) / 4).or_insert(0) += 1;
    });
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{paley, sylvester, PaleyKind};

    #[test]
    fn three_normalize_examples() {
        let s8 = sylvester(3);
        let (out, signs) = three_normalize(&s8, [0, 1, 2]).unwrap();
        // rows 0,1,2 of Sylvester 8 multiply to row 3, which is not constant
        assert_eq!(out.hadamard_product(&[0, 1, 2]).unwrap().count_minus(), 0);
        assert_eq!(signs, s8.row(3).to_signs());
        let (again, signs2) = three_normalize(&out, [0, 1, 2]).unwrap();
        assert_eq!(again, out);
        assert!(signs2.iter().all(|&s| s == 1));

        let s8c = three_normalize(&s8, [1, 2, 3]).unwrap();
        assert_eq!(s8c.0, s8);
        assert!(s8c.1.iter().all(|&s| s == 1));
        let flipped = s8.with_block_negated(&(0..8).collect::<Vec<_>>(), &[1 << 5]);
        let (restored, signs) = three_normalize(&flipped, [1, 2, 3]).unwrap();
        assert_eq!(signs[5], -1);
        assert_eq!(restored, s8);
    }

    #[test]
    fn sylvester_fields_follow_index_masks() {
        let s16 = sylvester(4);
        let fp = field_partition(&s16, [1, 2, 3]).unwrap();
        // h_1 h_2 at column c is (-1)^(c0 + c1) and h_1 h_3 is (-1)^(c1): fields
        // collect the columns with equal two low bits, in the fixed pattern order
        for f in 0..4 {
            assert_eq!(fp.fields[f].len(), 4);
            let low: Vec<usize> = fp.fields[f].iter().map(|c| c & 3).collect();
            assert!(low.iter().all(|&x| x == low[0]));
        }
        assert_eq!(fp.fields[0], vec![0, 4, 8, 12]);
        let s4 = sylvester(2);
        let fp4 = field_partition(&s4, [1, 2, 3]).unwrap();
        assert!(fp4.fields.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn field_partition_ignores_column_signs() {
        let s16 = sylvester(4);
        let flipped = s16.with_block_negated(&(0..16).collect::<Vec<_>>(), &[0b1010_0110_0001_0011]);
        assert_eq!(
            field_partition(&s16, [2, 5, 9]).unwrap().fields,
            field_partition(&flipped, [2, 5, 9]).unwrap().fields
        );
    }

    #[test]
    fn field_partition_rejects_non_hadamard() {
        let ones = HadamardMatrix::from_fn(8, |_, _| true).unwrap();
        assert!(matches!(field_partition(&ones, [0, 1, 2]), Err(StructureError::UnevenField { .. })));
    }

    #[test]
    fn sylvester_quadruple_types() {
        let s16 = sylvester(4);
        for q in [[1, 2, 4, 7], [0, 5, 10, 15], [3, 4, 8, 15]] {
            let x = q[0] ^ q[1] ^ q[2] ^ q[3];
            let info = quadruple_type(&s16, q, Axis::Rows).unwrap();
            assert_eq!(info.type_r, if x == 0 { 0 } else { 2 });
        }
        assert_eq!(quadruple_type(&s16, [1, 2, 3, 4], Axis::Rows).unwrap().type_r, 2);
        assert_eq!(quadruple_type(&s16, [0, 1, 2, 3], Axis::Columns).unwrap().type_r, 0);
    }

    #[test]
    fn closed_quadruple_counts_for_sylvester() {
        // C(2^k, 3) / 4
        assert_eq!(find_closed_quadruples(&sylvester(3), Axis::Rows).len(), 14);
        assert_eq!(find_closed_quadruples(&sylvester(4), Axis::Rows).len(), 140);
        assert_eq!(find_closed_quadruples(&sylvester(5), Axis::Columns).len(), 1240);
        let list = find_closed_quadruples(&sylvester(4), Axis::Rows);
        assert!(list.windows(2).all(|w| w[0].indices < w[1].indices));
        assert!(list.iter().all(|q| q.indices.windows(2).all(|p| p[0] < p[1])));
    }

    #[test]
    fn paley_closed_and_hall_examples() {
        let p24 = paley(23, PaleyKind::One).unwrap();
        assert!(find_closed_quadruples(&p24, Axis::Rows).is_empty());
        assert!(find_closed_quadruples(&p24, Axis::Columns).is_empty());
        assert!(find_hall_sets(&sylvester(4), Axis::Rows).is_empty());
        assert!(find_hall_sets(&sylvester(5), Axis::Rows).is_empty());
        let p28 = paley(27, PaleyKind::One).unwrap();
        assert!(find_hall_sets(&p28, Axis::Rows).is_empty());
    }

    #[test]
    fn hall_sets_have_one_column_per_field() {
        let p20 = paley(19, PaleyKind::One).unwrap();
        let halls = find_hall_sets(&p20, Axis::Rows);
        assert!(!halls.is_empty());
        for h in &halls {
            assert_eq!(h.type_r, 1);
            let hc = h.hall_columns.unwrap();
            let s = sorted4(h.indices);
            let fp = field_partition(&p20, [s[0], s[1], s[2]]).unwrap();
            let fields: Vec<usize> = hc.iter().map(|&c| fp.field_of(c)).collect();
            assert_eq!(fields, vec![0, 1, 2, 3]);
            // the Hall columns form a column Hall set when n = 4 mod 8
            assert_eq!(quadruple_type(&p20, hc, Axis::Columns).unwrap().type_r, 1);
        }
    }
}
