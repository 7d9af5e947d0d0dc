//! Quantities preserved (or predictably changed) by switching: closed-quadruple
//! counts, Smith normal forms and the binary codes of a matrix.

mod code;
mod smith;

pub use code::{binary_code, binary_code_summary, row_code, BinaryCode, BinaryCodeSummary, ENUMERATOR_DIMENSION_CAP};
pub use smith::{hadamard_smith_form, smith_class, smith_normal_form, SmithForm};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::HadamardMatrix;
use crate::structure::{closed_quadruple_indices, count_closed_quadruples, Axis};
use crate::switching::{switch_closed_quadruple, SwitchError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected order {expected}, got {found}")]
    WrongOrder { expected: usize, found: usize },
    #[error("order {order} is not {residue} mod {modulus}")]
    WrongResidue { order: usize, residue: usize, modulus: usize },
    #[error("invariant factors do not follow the order-36 pattern: {0:?}")]
    SmithPattern(Vec<String>),
    #[error("matrices differ in more or fewer than four rows")]
    NotASwitch,
    #[error("switched code is not contained in the original code")]
    InclusionFailed,
    #[error("codes differ by more than the switched weight-4 word")]
    ExtensionFailed,
    #[error(transparent)]
    Switch(#[from] SwitchError),
}

fn require_residue(n: usize, residue: usize, modulus: usize) -> Result<(), InvariantError> {
    if n % modulus == residue {
        Ok(())
    } else {
        Err(InvariantError::WrongResidue { order: n, residue, modulus })
    }
}

/// True iff the weight-4 supports of the column code are exactly the closed
/// row quadruples.
pub fn weight4_vs_closed_quadruples(m: &HadamardMatrix) -> Result<bool, InvariantError> {
    require_residue(m.order(), 0, 8)?;
    let supports = binary_code(m, Axis::Columns).weight4_supports();
    let closed = closed_quadruple_indices(m);
    Ok(supports == closed)
}

/// True iff every weight-4 support of the column code is a closed row quadruple.
pub fn weight4_supports_are_closed(m: &HadamardMatrix) -> bool {
    let closed: HashSet<[usize; 4]> = closed_quadruple_indices(m).into_iter().collect();
    binary_code(m, Axis::Columns).weight4_supports().iter().all(|s| closed.contains(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeInclusion {
    Equal,
    /// The switched code is a hyperplane of the original, which is recovered
    /// by adding the weight-4 word on the switched rows.
    ProperSubspaceByWeight4Vector,
}

/// Compares the column codes of `h` and a row-quadruple switch `h_prime` of it.
pub fn code_inclusion_check(h: &HadamardMatrix, h_prime: &HadamardMatrix) -> Result<CodeInclusion, InvariantError> {
    let n = h.order();
    if h_prime.order() != n {
        return Err(InvariantError::WrongOrder { expected: n, found: h_prime.order() });
    }
    let changed: Vec<usize> = (0..n).filter(|&i| h.row_words(i) != h_prime.row_words(i)).collect();
    if changed.len() != 4 {
        return Err(InvariantError::NotASwitch);
    }
    let c = binary_code(h, Axis::Columns);
    let c_prime = binary_code(h_prime, Axis::Columns);
    if !c_prime.is_subcode_of(&c) {
        return Err(InvariantError::InclusionFailed);
    }
    if c.dimension() == c_prime.dimension() {
        return Ok(CodeInclusion::Equal);
    }
    let word = c.indicator(&changed);
    let mut extended = c_prime.clone();
    extended.insert(word);
    if extended.dimension() == c.dimension() && c.is_subcode_of(&extended) {
        Ok(CodeInclusion::ProperSubspaceByWeight4Vector)
    } else {
        Err(InvariantError::ExtensionFailed)
    }
}

/// Switches every closed row quadruple on every field and reports whether the
/// number of closed row quadruples always stays the same.
pub fn closed_quadruple_count_invariance_check(h: &HadamardMatrix) -> Result<bool, InvariantError> {
    require_residue(h.order(), 8, 16)?;
    let before = count_closed_quadruples(h, Axis::Rows);
    for q in closed_quadruple_indices(h) {
        for field in 1..=4 {
            let switched = switch_closed_quadruple(h, q, field, Axis::Rows)?;
            if count_closed_quadruples(&switched, Axis::Rows) != before {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Histogram of `|Q ∩ Q'|` over unordered pairs of distinct closed row quadruples.
pub fn closed_quadruple_overlaps(h: &HadamardMatrix) -> BTreeMap<usize, usize> {
    let quads = closed_quadruple_indices(h);
    let mut hist = BTreeMap::new();
    for (i, a) in quads.iter().enumerate() {
        for b in &quads[i + 1..] {
            let shared = a.iter().filter(|x| b.contains(x)).count();
            *hist.entry(shared).or_insert(0) += 1;
        }
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{double, paley, sylvester, DoublingShape, PaleyKind};

    fn doubled_24() -> HadamardMatrix {
        let p = paley(11, PaleyKind::One).unwrap();
        double(&p, &p, &(0..12).collect::<Vec<_>>(), DoublingShape::Stacked).unwrap()
    }

    #[test]
    fn weight4_correspondence() {
        let m = doubled_24();
        assert!(weight4_vs_closed_quadruples(&m).unwrap());
        let p24 = paley(23, PaleyKind::One).unwrap();
        assert!(weight4_vs_closed_quadruples(&p24).unwrap());
        assert!(binary_code(&p24, Axis::Columns).weight4_supports().is_empty());
        let s16 = sylvester(4);
        assert!(weight4_supports_are_closed(&s16));
        assert!(matches!(
            weight4_vs_closed_quadruples(&paley(19, PaleyKind::One).unwrap()),
            Err(InvariantError::WrongResidue { .. })
        ));
    }

    #[test]
    fn inclusion_at_24_is_equality() {
        let m = doubled_24();
        for q in closed_quadruple_indices(&m).into_iter().take(10) {
            let s = switch_closed_quadruple(&m, q, 1, Axis::Rows).unwrap();
            assert_eq!(code_inclusion_check(&m, &s).unwrap(), CodeInclusion::Equal);
        }
    }

    #[test]
    fn inclusion_rejects_unrelated_matrices() {
        let m = doubled_24();
        assert_eq!(code_inclusion_check(&m, &m), Err(InvariantError::NotASwitch));
    }

    #[test]
    fn count_invariance_and_overlaps_at_24() {
        let m = doubled_24();
        assert!(closed_quadruple_count_invariance_check(&m).unwrap());
        let hist = closed_quadruple_overlaps(&m);
        assert!(hist.keys().all(|&k| k == 0 || k == 2), "{hist:?}");
        assert!(closed_quadruple_count_invariance_check(&sylvester(4)).is_err());
    }
}
