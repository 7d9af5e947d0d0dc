use std::collections::BTreeSet;
use std::io::Write;

use hadswitch::enumeration::{enumerate, partition_dual_pairs, report, switch_moves, EnumerationError, StoreError};
use hadswitch::{canonical_key, double, paley, sylvester, CanonicalKey, ClassStore, DoublingShape, EnumerationMode, EnumerationOptions, HadamardMatrix, PaleyKind};

fn single() -> EnumerationOptions {
    EnumerationOptions { threads: Some(1), ..Default::default() }
}

fn key_set(store: &ClassStore) -> BTreeSet<CanonicalKey> {
    store.keys().iter().cloned().collect()
}

fn doubled_paley12() -> HadamardMatrix {
    let p12 = paley(11, PaleyKind::One).unwrap();
    double(&p12, &p12, &(0..12).collect::<Vec<_>>(), DoublingShape::Stacked).unwrap()
}

fn run_in_memory(seed: &HadamardMatrix, mode: EnumerationMode, options: &EnumerationOptions) -> ClassStore {
    let mut store = ClassStore::in_memory(mode, seed.order());
    enumerate(seed, mode, &mut store, options).unwrap();
    store
}

#[test]
fn same_class_set_for_every_thread_count() {
    let seed = paley(19, PaleyKind::One).unwrap();
    let one = run_in_memory(&seed, EnumerationMode::Q, &single());
    let three = run_in_memory(&seed, EnumerationMode::Q, &EnumerationOptions { threads: Some(3), ..Default::default() });
    assert_eq!(one.len(), 3);
    assert_eq!(key_set(&one), key_set(&three));
    // the batch merge keeps insertion order too
    assert_eq!(one.keys(), three.keys());
}

#[test]
fn skipping_transpose_entries_does_not_change_the_result() {
    let seed = paley(19, PaleyKind::One).unwrap();
    let skip = run_in_memory(&seed, EnumerationMode::Q, &single());
    let full = run_in_memory(&seed, EnumerationMode::Q, &EnumerationOptions { skip_transposes: false, ..single() });
    assert_eq!(key_set(&skip), key_set(&full));
}

#[test]
fn interrupted_run_resumes_to_the_same_set() {
    let seed = doubled_paley12();
    let reference = run_in_memory(&seed, EnumerationMode::Q, &single());
    assert_eq!(reference.len(), 59);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store");
    {
        let mut store = ClassStore::create(&path, EnumerationMode::Q, 24).unwrap();
        let r = enumerate(&seed, EnumerationMode::Q, &mut store, &EnumerationOptions { limit: Some(30), ..single() }).unwrap();
        assert_eq!(r.class_count, 30);
        assert!(!r.exhausted);
    }
    // a torn write at the end of the log
    let mut log = std::fs::OpenOptions::new().append(true).open(path.join("keys.log")).unwrap();
    log.write_all(&[0xde, 0xad, 0xbe, 0xef, 0, 0]).unwrap();
    drop(log);

    let mut store = ClassStore::resume(&path).unwrap();
    assert_eq!(store.len(), 30);
    let mut sizes = vec![store.len()];
    let r = enumerate(&seed, EnumerationMode::Q, &mut store, &single()).unwrap();
    sizes.push(store.len());
    assert!(r.exhausted);
    assert_eq!(key_set(&store), key_set(&reference));
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));

    // reopening an exhausted store is a no-op
    drop(store);
    let mut store = ClassStore::resume(&path).unwrap();
    assert!(store.is_exhausted());
    let again = enumerate(&seed, EnumerationMode::Q, &mut store, &single()).unwrap();
    assert_eq!(again.class_count, 59);
    assert_eq!(again.explored, r.explored);
}

#[test]
fn store_metadata_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store");
    let s16 = sylvester(4);
    {
        let mut store = ClassStore::create(&path, EnumerationMode::QR, 16).unwrap();
        enumerate(&s16, EnumerationMode::QR, &mut store, &single()).unwrap();
    }
    assert!(matches!(ClassStore::create(&path, EnumerationMode::QR, 16), Err(StoreError::AlreadyExists(_))));
    assert!(matches!(ClassStore::open_or_create(&path, EnumerationMode::Q, 16), Err(StoreError::ModeMismatch { .. })));
    assert!(matches!(ClassStore::open_or_create(&path, EnumerationMode::QR, 32), Err(StoreError::OrderMismatch { .. })));

    let mut store = ClassStore::resume(&path).unwrap();
    assert!(matches!(
        enumerate(&s16, EnumerationMode::QC, &mut store, &single()),
        Err(EnumerationError::Store(StoreError::ModeMismatch { .. }))
    ));
    // a seed from another class is refused
    let p16 = double(&sylvester(3), &paley(7, PaleyKind::One).unwrap(), &[0, 1, 2, 3, 4, 5, 6, 7], DoublingShape::Stacked).unwrap();
    let other_class = !store.contains(&canonical_key(&p16));
    if other_class {
        assert!(matches!(enumerate(&p16, EnumerationMode::QR, &mut store, &single()), Err(EnumerationError::SeedMismatch)));
    }

    let meta = std::fs::read_to_string(path.join("meta.json")).unwrap();
    std::fs::write(path.join("meta.json"), meta.replace("\"version\":1", "\"version\":99").replace("\"version\": 1", "\"version\": 99")).unwrap();
    assert!(matches!(ClassStore::resume(&path), Err(StoreError::VersionMismatch { found: 99, .. })));

    let bad = dir.path().join("bad");
    std::fs::create_dir(&bad).unwrap();
    std::fs::write(bad.join("meta.json"), "{ not json").unwrap();
    assert!(matches!(ClassStore::resume(&bad), Err(StoreError::Corrupt(_))));
}

#[test]
fn corrupt_log_records_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store");
    {
        let mut store = ClassStore::create(&path, EnumerationMode::QR, 16).unwrap();
        enumerate(&sylvester(4), EnumerationMode::QR, &mut store, &single()).unwrap();
    }
    let log_path = path.join("keys.log");
    let mut bytes = std::fs::read(&log_path).unwrap();
    bytes[0] ^= 0xff;
    std::fs::write(&log_path, &bytes).unwrap();
    assert!(matches!(ClassStore::resume(&path), Err(StoreError::Corrupt(_))));
}

#[test]
fn wrong_order_class_for_the_mode() {
    let p20 = paley(19, PaleyKind::One).unwrap();
    let mut store = ClassStore::in_memory(EnumerationMode::QR, 20);
    assert!(matches!(
        enumerate(&p20, EnumerationMode::QR, &mut store, &single()),
        Err(EnumerationError::WrongOrderClass { .. })
    ));
    let not_hadamard = HadamardMatrix::from_fn(8, |_, _| true).unwrap();
    let mut store = ClassStore::in_memory(EnumerationMode::Q, 8);
    assert!(matches!(enumerate(&not_hadamard, EnumerationMode::Q, &mut store, &single()), Err(EnumerationError::InvalidSeed)));
}

#[test]
fn limit_stops_early() {
    let seed = sylvester(4);
    let mut store = ClassStore::in_memory(EnumerationMode::QR, 16);
    let r = enumerate(&seed, EnumerationMode::QR, &mut store, &EnumerationOptions { limit: Some(3), ..single() }).unwrap();
    assert_eq!(r.class_count, 3);
    assert!(!r.exhausted);
    let r = enumerate(&seed, EnumerationMode::QR, &mut store, &single()).unwrap();
    assert_eq!(r.class_count, 5);
    assert!(r.exhausted);
}

/// Every switch of every class lands back in the store.
#[test]
fn exhausted_stores_are_closed_under_switching() {
    let cases = [
        (sylvester(4), EnumerationMode::QR),
        (sylvester(4), EnumerationMode::QC),
        (sylvester(4), EnumerationMode::Q),
        (paley(19, PaleyKind::One).unwrap(), EnumerationMode::Q),
    ];
    for (seed, mode) in cases {
        let store = run_in_memory(&seed, mode, &single());
        assert!(store.is_exhausted());
        for key in store.keys() {
            let m = key.decode();
            for mv in switch_moves(&m, mode).unwrap() {
                let child = mv.apply(&m).unwrap();
                assert!(child.verify());
                assert!(store.contains(&canonical_key(&child)), "{mode} store not closed");
            }
            if mode == EnumerationMode::Q {
                assert!(store.contains(&canonical_key(&m.transpose())));
            }
        }
    }
}

#[test]
fn reports_are_sorted_and_paired() {
    let store = run_in_memory(&sylvester(4), EnumerationMode::QR, &single());
    let r = report(&store);
    assert_eq!(r.class_count, 5);
    assert!(r.per_class_stats.windows(2).all(|w| w[0].key < w[1].key));
    let pairs = partition_dual_pairs(&store);
    assert_eq!(pairs, r.dual_pairing);
    let s16 = canonical_key(&sylvester(4)).to_hex();
    assert!(pairs.iter().any(|p| p.key == s16 && p.dual_key.is_none()));
    // every class shows up exactly once across the pairs
    let mut seen = BTreeSet::new();
    for p in &pairs {
        assert!(seen.insert(p.key.clone()));
        if let Some(d) = &p.dual_key {
            if p.dual_in_store {
                assert!(seen.insert(d.clone()));
            }
        }
    }
    assert_eq!(seen.len(), 5);
}

/// Orbit pruning relies on this: the four field switches of a closed
/// quadruple land in one class.
#[test]
fn closed_switch_class_does_not_depend_on_the_field() {
    let mut subjects = run_in_memory(&sylvester(4), EnumerationMode::QR, &single()).keys().iter().map(CanonicalKey::decode).collect::<Vec<_>>();
    subjects.push(doubled_paley12());
    for m in subjects {
        for q in hadswitch::structure::find_closed_quadruples(&m, hadswitch::Axis::Rows) {
            let keys: BTreeSet<CanonicalKey> = (1..=4)
                .map(|f| canonical_key(&hadswitch::switching::switch_closed_quadruple(&m, q.indices, f, hadswitch::Axis::Rows).unwrap()))
                .collect();
            assert_eq!(keys.len(), 1, "quadruple {:?}", q.indices);
        }
    }
}
