//! Offline checks that follow directly from the definitions.

use serde::{Deserialize, Serialize};

use hadswitch::canonical::to_graph;
use hadswitch::enumeration::{enumerate, EnumerationError, StoreError};
use hadswitch::structure::{field_partition, quadruple_type, Axis};
use hadswitch::switching::switch_closed_quadruple;
use hadswitch::{canonical_key, double, paley, sylvester, ClassStore, DoublingShape, EnumerationMode, EnumerationOptions, HadamardMatrix, PaleyKind, SignedPermutation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

fn check(name: &str, f: impl FnOnce() -> bool) -> Check {
    let passed = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or(false);
    Check { name: name.to_string(), passed }
}

pub fn run() -> Vec<Check> {
    let s8 = sylvester(3);
    vec![
        check("sylvester order 2 is [[+,+],[+,-]] and Hadamard", || {
            let s2 = sylvester(1);
            s2.to_signs() == vec![vec![1, 1], vec![1, -1]] && s2.verify()
        }),
        check("all-ones 4x4 is not Hadamard", || {
            !HadamardMatrix::from_fn(4, |_, _| true).unwrap().verify()
        }),
        check("all-ones row is the identity of the row product", || {
            s8.hadamard_product(&[0, 3]).unwrap() == s8.row(3)
        }),
        check("sylvester matrices are symmetric", || (0..6).all(|k| sylvester(k).is_symmetric())),
        check("paley I and II seeds are Hadamard", || {
            paley(7, PaleyKind::One).unwrap().verify() && paley(5, PaleyKind::Two).unwrap().verify()
        }),
        check("doubled rows i and i+n agree on the first half", || {
            let p7 = paley(7, PaleyKind::One).unwrap();
            let h = double(&s8, &p7, &(0..8).collect::<Vec<_>>(), DoublingShape::Stacked).unwrap();
            h.verify() && (0..8).all(|i| (0..8).all(|c| h.get(i, c) == h.get(i + 8, c)))
        }),
        check("the four fields of three rows have n/4 columns each", || {
            let fp = field_partition(&s8, [1, 2, 4]).unwrap();
            fp.fields.iter().all(|f| f.len() == 2)
        }),
        check("rows 0,1,2,3 of sylvester 8 are closed", || {
            quadruple_type(&s8, [0, 1, 2, 3], Axis::Rows).unwrap().is_closed()
        }),
        check("switching a closed quadruple twice is the identity", || {
            let once = switch_closed_quadruple(&s8, [0, 1, 2, 3], 2, Axis::Rows).unwrap();
            once.verify() && switch_closed_quadruple(&once, [0, 1, 2, 3], 2, Axis::Rows).unwrap() == s8
        }),
        check("equivalence graph has 4n vertices", || to_graph(&s8).vertex_count() == 32),
        check("negating a row and swapping columns keeps the key", || {
            let mut signs = vec![1i8; 8];
            signs[5] = -1;
            let rows = SignedPermutation::negations(signs).unwrap();
            let cols = SignedPermutation::permutation(vec![1, 0, 2, 3, 4, 5, 7, 6]).unwrap();
            canonical_key(&s8.apply(&rows, &cols).unwrap()) == canonical_key(&s8)
        }),
        check("keys decode to an equivalent matrix", || {
            let key = canonical_key(&s8);
            canonical_key(&key.decode()) == key
        }),
        check("enumerating an exhausted store does no work", || {
            let mut store = ClassStore::in_memory(EnumerationMode::QR, 8);
            let opts = EnumerationOptions { threads: Some(1), ..Default::default() };
            let first = enumerate(&s8, EnumerationMode::QR, &mut store, &opts).unwrap();
            let again = enumerate(&s8, EnumerationMode::QR, &mut store, &opts).unwrap();
            first.exhausted && again == first
        }),
        check("a store refuses a different mode", || {
            let mut store = ClassStore::in_memory(EnumerationMode::QR, 8);
            let opts = EnumerationOptions { threads: Some(1), ..Default::default() };
            matches!(
                enumerate(&s8, EnumerationMode::QC, &mut store, &opts),
                Err(EnumerationError::Store(StoreError::ModeMismatch { .. }))
            )
        }),
    ]
}
