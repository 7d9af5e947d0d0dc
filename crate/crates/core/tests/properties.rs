use proptest::prelude::*;

use hadswitch::invariants::hadamard_smith_form;
use hadswitch::structure::{find_closed_quadruples, find_hall_sets};
use hadswitch::switching::{switch_closed_quadruple, switch_hall_set};
use hadswitch::{canonical_key, double, paley, sylvester, Axis, DoublingShape, HadamardMatrix, PaleyKind, SignedPermutation};

fn corpus() -> Vec<HadamardMatrix> {
    vec![
        sylvester(3),
        paley(11, PaleyKind::One).unwrap(),
        sylvester(4),
        double(&sylvester(3), &paley(7, PaleyKind::One).unwrap(), &[2, 0, 1, 3, 4, 5, 7, 6], DoublingShape::Stacked).unwrap(),
        paley(19, PaleyKind::One).unwrap(),
    ]
}

fn signed_permutation(n: usize) -> impl Strategy<Value = SignedPermutation> {
    (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), proptest::collection::vec(any::<bool>(), n))
        .prop_map(|(perm, signs)| SignedPermutation::new(perm, signs.into_iter().map(|s| if s { 1 } else { -1 }).collect()).unwrap())
}

/// A corpus matrix together with a random row and column move of its order.
fn transformed() -> impl Strategy<Value = (HadamardMatrix, HadamardMatrix)> {
    (0..corpus().len()).prop_flat_map(|i| {
        let m = corpus().swap_remove(i);
        let n = m.order();
        (Just(m), signed_permutation(n), signed_permutation(n)).prop_map(|(m, r, c)| {
            let t = m.apply(&r, &c).unwrap();
            (m, t)
        })
    })
}

/// Closed quadruples by checking every 4-subset entry by entry.
fn brute_closed(m: &HadamardMatrix) -> Vec<[usize; 4]> {
    let n = m.order();
    let s = m.to_signs();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let prod: Vec<i8> = (0..n).map(|j| s[a][j] * s[b][j] * s[c][j] * s[d][j]).collect();
                    if prod.iter().all(|&x| x == prod[0]) {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn closed_quadruples_match_brute_force((_, t) in transformed()) {
        let mut fast: Vec<[usize; 4]> = find_closed_quadruples(&t, Axis::Rows).into_iter().map(|q| q.indices).collect();
        fast.sort_unstable();
        prop_assert_eq!(fast, brute_closed(&t));
    }

    #[test]
    fn keys_ignore_equivalence_moves((m, t) in transformed()) {
        prop_assert!(t.verify());
        prop_assert_eq!(canonical_key(&t), canonical_key(&m));
        prop_assert_eq!(canonical_key(&t.transpose()), canonical_key(&m.transpose()));
    }

    #[test]
    fn switches_stay_hadamard((_, t) in transformed(), field in 1usize..=4) {
        for q in find_closed_quadruples(&t, Axis::Rows).into_iter().take(20) {
            let s = switch_closed_quadruple(&t, q.indices, field, Axis::Rows).unwrap();
            prop_assert!(s.verify());
            prop_assert_eq!(switch_closed_quadruple(&s, q.indices, field, Axis::Rows).unwrap(), t.clone());
        }
        if t.order() % 8 == 4 {
            let before = hadamard_smith_form(&t);
            for q in find_hall_sets(&t, Axis::Rows).into_iter().take(10) {
                let s = switch_hall_set(&t, q.indices, field).unwrap();
                prop_assert!(s.verify());
                prop_assert_eq!(&hadamard_smith_form(&s).factors, &before.factors);
            }
        }
    }
}
