//! Closed-quadruple and Hall-set switching, and validated block substitution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{double, DoublingShape};
use crate::matrix::{HadamardMatrix, MatrixError, SignedPermutation};
use crate::structure::{field_partition, quadruple_type, Axis, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwitchError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("quadruple {0:?} is not closed")]
    NotClosed([usize; 4]),
    #[error("quadruple {0:?} is not a Hall set")]
    NotHallSet([usize; 4]),
    #[error("Hall-set switching needs order = 4 (mod 8), got {0}")]
    WrongOrderClass(usize),
    #[error("field {0} out of range 1..=4")]
    FieldOutOfRange(usize),
    #[error("replacement block is {found_rows}x{found_cols}, expected {rows}x{cols}")]
    DimensionMismatch { rows: usize, cols: usize, found_rows: usize, found_cols: usize },
    #[error("replacement entry ({0}, {1}) is not +1 or -1")]
    BadEntry(usize, usize),
    #[error("replacement Gram matrix differs from the original at ({0}, {1})")]
    GramMismatch(usize, usize),
    #[error("Hall set {0:?} has no consistent normal form; the input is not a Hadamard matrix")]
    NoNormalForm([usize; 4]),
    #[error("row indices must differ")]
    SameRow,
    #[error("orders differ: {0} and {1}")]
    OrderMismatch(usize, usize),
}

fn check_field(field: usize) -> Result<usize, SwitchError> {
    if (1..=4).contains(&field) {
        Ok(field - 1)
    } else {
        Err(SwitchError::FieldOutOfRange(field))
    }
}

fn sorted4(idx: [usize; 4]) -> [usize; 4] {
    let mut s = idx;
    s.sort_unstable();
    s
}

/// Negates the entries of the quadruple's four lines that lie in field
/// `field` (1-based, ordered as in [`crate::structure::FieldPartition`],
/// defined by the three smallest indices).
pub fn switch_closed_quadruple(m: &HadamardMatrix, quad: [usize; 4], field: usize, axis: Axis) -> Result<HadamardMatrix, SwitchError> {
    let f = check_field(field)?;
    let view = axis.view(m);
    let info = quadruple_type(&view, quad, Axis::Rows)?;
    if !info.is_closed() {
        return Err(SwitchError::NotClosed(quad));
    }
    let s = sorted4(quad);
    let fp = field_partition(&view, [s[0], s[1], s[2]])?;
    let out = view.with_block_negated(&quad, fp.mask(f));
    Ok(match axis {
        Axis::Rows => out,
        Axis::Columns => out.transpose(),
    })
}

/// The index sets a Hall-set switch negates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallSwitchBlocks {
    pub hall_rows: [usize; 4],
    pub hall_columns: [usize; 4],
    /// Non-Hall columns of the chosen column field.
    pub field_columns: Vec<usize>,
    /// Non-Hall rows of the row field paired with it.
    pub field_rows: Vec<usize>,
}

/// Locates the blocks negated by switching Hall set `quad` on column field
/// `field` (1-based).
///
/// Column fields come from the three smallest Hall rows, row fields from the
/// three smallest Hall columns. A row field is paired with a column field
/// when, in the normal form, their shared block has row sums 2 rather than 0;
/// the sign-free quantity `|Σ_c h[r][c]·h[q][c]|` over the field's non-Hall
/// columns detects this for any representative row `r` and Hall row `q`.
pub fn hall_switch_blocks(m: &HadamardMatrix, quad: [usize; 4], field: usize) -> Result<HallSwitchBlocks, SwitchError> {
    let f = check_field(field)?;
    let n = m.order();
    if n % 8 != 4 {
        return Err(SwitchError::WrongOrderClass(n));
    }
    let info = quadruple_type(m, quad, Axis::Rows)?;
    let hall_columns = match (info.type_r, info.hall_columns) {
        (1, Some(h)) => h,
        _ => return Err(SwitchError::NotHallSet(quad)),
    };
    let s = sorted4(quad);
    let col_fields = field_partition(m, [s[0], s[1], s[2]])?;
    let hk = sorted4(hall_columns);
    let row_fields = field_partition(&m.transpose(), [hk[0], hk[1], hk[2]])?;

    let hall_col = hall_columns[f];
    let field_columns: Vec<usize> = col_fields.fields[f].iter().copied().filter(|&c| c != hall_col).collect();
    let q = s[0];
    let mut paired = None;
    for (a, rows) in row_fields.fields.iter().enumerate() {
        let hall_in_field = rows.iter().filter(|r| quad.contains(r)).count();
        if hall_in_field != 1 {
            return Err(SwitchError::NotHallSet(quad));
        }
        let r = *rows.iter().find(|r| !quad.contains(r)).ok_or(SwitchError::NotHallSet(quad))?;
        let sum: i64 = field_columns.iter().map(|&c| (m.get(r, c) * m.get(q, c)) as i64).sum();
        if sum.abs() == 2 {
            if paired.is_some() {
                return Err(SwitchError::NoNormalForm(quad));
            }
            paired = Some(a);
        } else if sum != 0 {
            return Err(SwitchError::NoNormalForm(quad));
        }
    }
    let a = paired.ok_or(SwitchError::NoNormalForm(quad))?;
    let field_rows = row_fields.fields[a].iter().copied().filter(|r| !quad.contains(r)).collect();
    Ok(HallSwitchBlocks {
        hall_rows: quad,
        hall_columns,
        field_columns,
        field_rows,
    })
}

/// Switches a Hall set by negating the Hall rows on the chosen field's
/// non-Hall columns and the paired field's non-Hall rows on the Hall columns.
pub fn switch_hall_set(m: &HadamardMatrix, quad: [usize; 4], field: usize) -> Result<HadamardMatrix, SwitchError> {
    let b = hall_switch_blocks(m, quad, field)?;
    let cells = b
        .hall_rows
        .iter()
        .flat_map(|&r| b.field_columns.iter().map(move |&c| (r, c)))
        .chain(b.field_rows.iter().flat_map(|&r| b.hall_columns.iter().map(move |&c| (r, c))));
    Ok(m.with_entries_negated(cells))
}

const H4: [[i8; 4]; 4] = [[1, -1, -1, -1], [-1, 1, -1, -1], [-1, -1, 1, -1], [-1, -1, -1, 1]];
const F_PATTERNS: [[i8; 4]; 4] = [[1, 1, 1, 1], [1, -1, -1, 1], [1, -1, 1, -1], [-1, -1, 1, 1]];
// G_1 = F_1^T, G_j = -F_j^T otherwise
const G_PATTERNS: [[i8; 4]; 4] = [[1, 1, 1, 1], [-1, 1, 1, -1], [-1, 1, -1, 1], [1, 1, -1, -1]];

/// A signed permutation taking a matrix to the Hall-set normal form:
/// Hall rows and columns first, `H_4` in the corner, then the row and column
/// blocks `1..4` with `F_i`/`G_i` borders and `A_ij` sums 2 on the diagonal
/// and 0 off it.
#[derive(Clone, Debug)]
pub struct HallNormalForm {
    pub row_move: SignedPermutation,
    pub col_move: SignedPermutation,
    /// Original column indices of each column block.
    pub column_blocks: [Vec<usize>; 4],
    /// Original row indices of each row block.
    pub row_blocks: [Vec<usize>; 4],
}

fn match_pattern(v: &[i8; 4], patterns: &[[i8; 4]; 4]) -> Option<(usize, i8)> {
    for (i, p) in patterns.iter().enumerate() {
        if v == p {
            return Some((i, 1));
        }
        if v.iter().zip(p).all(|(a, b)| *a == -*b) {
            return Some((i, -1));
        }
    }
    None
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|x| p.contains(&x)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Searches the orderings of the Hall columns (and the two global sign
/// choices) for one that realizes the normal form exactly.
pub fn hall_normal_form(m: &HadamardMatrix, quad: [usize; 4]) -> Result<HallNormalForm, SwitchError> {
    let n = m.order();
    if n % 8 != 4 {
        return Err(SwitchError::WrongOrderClass(n));
    }
    let info = quadruple_type(m, quad, Axis::Rows)?;
    let hall = match (info.type_r, info.hall_columns) {
        (1, Some(h)) => h,
        _ => return Err(SwitchError::NotHallSet(quad)),
    };
    let rows_q = sorted4(quad);
    let block = (n - 4) / 4;
    for perm in permutations4() {
        let cols_k = [hall[perm[0]], hall[perm[1]], hall[perm[2]], hall[perm[3]]];
        for d0 in [1i8, -1] {
            let e: Vec<i8> = (0..4).map(|u| d0 * m.get(rows_q[0], cols_k[u]) * H4[0][u]).collect();
            let d: Vec<i8> = (0..4).map(|t| m.get(rows_q[t], cols_k[0]) * e[0] * H4[t][0]).collect();
            let corner_ok = (0..4).all(|t| (0..4).all(|u| d[t] * e[u] * m.get(rows_q[t], cols_k[u]) == H4[t][u]));
            if !corner_ok {
                continue;
            }
            let mut col_sign = vec![0i8; n];
            let mut column_blocks: [Vec<usize>; 4] = Default::default();
            let mut ok = true;
            for c in (0..n).filter(|c| !cols_k.contains(c)) {
                let v = [0, 1, 2, 3].map(|t| d[t] * m.get(rows_q[t], c));
                match match_pattern(&v, &F_PATTERNS) {
                    Some((i, s)) => {
                        col_sign[c] = s;
                        column_blocks[i].push(c);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            let mut row_sign = vec![0i8; n];
            let mut row_blocks: [Vec<usize>; 4] = Default::default();
            for r in (0..n).filter(|r| !rows_q.contains(r)) {
                if !ok {
                    break;
                }
                let w = [0, 1, 2, 3].map(|u| e[u] * m.get(r, cols_k[u]));
                match match_pattern(&w, &G_PATTERNS) {
                    Some((i, s)) => {
                        row_sign[r] = s;
                        row_blocks[i].push(r);
                    }
                    None => ok = false,
                }
            }
            if !ok || column_blocks.iter().chain(row_blocks.iter()).any(|b| b.len() != block) {
                continue;
            }
            let sums_ok = (0..4).all(|i| {
                (0..4).all(|j| {
                    let want = if i == j { 2 } else { 0 };
                    let row_sums = row_blocks[i].iter().all(|&r| {
                        column_blocks[j]
                            .iter()
                            .map(|&c| (row_sign[r] * col_sign[c] * m.get(r, c)) as i64)
                            .sum::<i64>()
                            == want
                    });
                    let col_sums = column_blocks[j].iter().all(|&c| {
                        row_blocks[i]
                            .iter()
                            .map(|&r| (row_sign[r] * col_sign[c] * m.get(r, c)) as i64)
                            .sum::<i64>()
                            == want
                    });
                    row_sums && col_sums
                })
            });
            if !sums_ok {
                continue;
            }
            let mut rperm = vec![0usize; n];
            let mut rsign = vec![1i8; n];
            let mut cperm = vec![0usize; n];
            let mut csign = vec![1i8; n];
            for t in 0..4 {
                rperm[rows_q[t]] = t;
                rsign[rows_q[t]] = d[t];
                cperm[cols_k[t]] = t;
                csign[cols_k[t]] = e[t];
            }
            let mut pos = 4;
            for b in &row_blocks {
                for &r in b {
                    rperm[r] = pos;
                    rsign[r] = row_sign[r];
                    pos += 1;
                }
            }
            pos = 4;
            for b in &column_blocks {
                for &c in b {
                    cperm[c] = pos;
                    csign[c] = col_sign[c];
                    pos += 1;
                }
            }
            return Ok(HallNormalForm {
                row_move: SignedPermutation::new(rperm, rsign)?,
                col_move: SignedPermutation::new(cperm, csign)?,
                column_blocks,
                row_blocks,
            });
        }
    }
    Err(SwitchError::NoNormalForm(quad))
}

/// Reference Hall-set switch: move to the normal form, negate `F_block` and
/// `G_block` (1-based block of the normal form), move back. Slow; kept for
/// differential testing of [`switch_hall_set`].
pub fn switch_hall_set_via_normal_form(m: &HadamardMatrix, quad: [usize; 4], block: usize) -> Result<HadamardMatrix, SwitchError> {
    let i = check_field(block)?;
    let nf = hall_normal_form(m, quad)?;
    let normal = m.apply(&nf.row_move, &nf.col_move)?;
    let n = m.order();
    let width = (n - 4) / 4;
    let span = 4 + i * width..4 + (i + 1) * width;
    let cells = (0..4)
        .flat_map(|r| span.clone().map(move |c| (r, c)))
        .chain(span.clone().flat_map(|r| (0..4).map(move |c| (r, c))));
    let switched = normal.with_entries_negated(cells);
    Ok(switched.apply(&nf.row_move.inverse(), &nf.col_move.inverse())?)
}

/// Replaces rows `rows` of `m` by `replacement` when `B^T B = A^T A`, with
/// `A` the submatrix being replaced. The check is exact.
pub fn substitute_block<R: AsRef<[i8]>>(m: &HadamardMatrix, rows: &[usize], replacement: &[R]) -> Result<HadamardMatrix, SwitchError> {
    m.check_indices(rows)?;
    let n = m.order();
    let found_cols = replacement.first().map_or(n, |r| r.as_ref().len());
    if replacement.len() != rows.len() || replacement.iter().any(|r| r.as_ref().len() != n) {
        return Err(SwitchError::DimensionMismatch {
            rows: rows.len(),
            cols: n,
            found_rows: replacement.len(),
            found_cols,
        });
    }
    for (i, r) in replacement.iter().enumerate() {
        if let Some(j) = r.as_ref().iter().position(|&v| v != 1 && v != -1) {
            return Err(SwitchError::BadEntry(i, j));
        }
    }
    for c in 0..n {
        for d in c..n {
            let before: i64 = rows.iter().map(|&r| (m.get(r, c) * m.get(r, d)) as i64).sum();
            let after: i64 = replacement.iter().map(|b| (b.as_ref()[c] * b.as_ref()[d]) as i64).sum();
            if before != after {
                return Err(SwitchError::GramMismatch(c, d));
            }
        }
    }
    let cells = rows.iter().enumerate().flat_map(|(k, &r)| {
        (0..n)
            .filter(move |&c| m.get(r, c) != replacement[k].as_ref()[c])
            .map(move |c| (r, c))
    });
    Ok(m.with_entries_negated(cells))
}

/// Checks that, in `[[A, B], [A, -B]]`, switching the closed quadruple
/// `(i, j, i+n, j+n)` on the field where rows `i` and `j` of `B` differ gives
/// the same matrix as swapping rows `i` and `j` of `B`.
pub fn doubled_swap_equivalence_check(a: &HadamardMatrix, b: &HadamardMatrix, i: usize, j: usize) -> Result<bool, SwitchError> {
    let n = a.order();
    if b.order() != n {
        return Err(SwitchError::OrderMismatch(n, b.order()));
    }
    if i == j {
        return Err(SwitchError::SameRow);
    }
    a.check_indices(&[i, j])?;
    let ident: Vec<usize> = (0..n).collect();
    let h = double(a, b, &ident, DoublingShape::Stacked).map_err(|_| SwitchError::OrderMismatch(n, b.order()))?;
    let mut swapped = ident.clone();
    swapped.swap(i, j);
    let expected = double(a, b, &swapped, DoublingShape::Stacked).map_err(|_| SwitchError::OrderMismatch(n, b.order()))?;

    let quad = [i, j, i + n, j + n];
    let s = sorted4(quad);
    let fp = field_partition(&h, [s[0], s[1], s[2]])?;
    let differ: Vec<usize> = (0..n).filter(|&c| b.get(i, c) != b.get(j, c)).map(|c| c + n).collect();
    let Some(f) = (0..4).find(|&f| fp.fields[f] == differ) else {
        return Ok(false);
    };
    let switched = switch_closed_quadruple(&h, quad, f + 1, Axis::Rows)?;
    Ok(switched == expected)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SwitchKind {
    ClosedRowQuadruple,
    ClosedColumnQuadruple,
    HallSet,
}

/// One switching operation, applicable to matrices where `indices` name a
/// quadruple of the right kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwitchMove {
    pub kind: SwitchKind,
    pub indices: [usize; 4],
    pub field: usize,
}

impl SwitchMove {
    pub fn apply(&self, m: &HadamardMatrix) -> Result<HadamardMatrix, SwitchError> {
        match self.kind {
            SwitchKind::ClosedRowQuadruple => switch_closed_quadruple(m, self.indices, self.field, Axis::Rows),
            SwitchKind::ClosedColumnQuadruple => switch_closed_quadruple(m, self.indices, self.field, Axis::Columns),
            SwitchKind::HallSet => switch_hall_set(m, self.indices, self.field),
        }
    }
}
