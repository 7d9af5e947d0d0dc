//! Breadth-first generation of Q-, QR- and QC-classes by switching.
//!
//! Starting from a seed, every class in the store is decoded in insertion
//! order, every switch of the mode's kind (always on field 1) is applied and
//! the canonical key of the result is inserted if new. Closed quadruples that
//! an automorphism of the parent maps onto each other give the same child
//! class, so only one per orbit is switched. In Q mode the
//! transpose class of each new key is inserted right after it; for
//! `n = 4 (mod 8)` a key inserted that way is not explored, because its
//! Hall-set switches are the transposes of those of the key before it.
//!
//! Work is done in batches: the switches and canonical keys of a batch of
//! frontier entries are computed in parallel, then merged one parent at a
//! time in frontier order. The merged result, including insertion order, is
//! therefore the same for every thread count.

mod store;

pub use store::{ClassStore, StoreMeta, FLAG_TRANSPOSE_OF_PREVIOUS, STORE_VERSION};

use std::collections::HashMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{canonical_form, canonical_key, CanonicalKey};
use crate::matrix::HadamardMatrix;
use crate::structure::{closed_quadruple_indices, count_closed_quadruples, find_hall_sets, Axis};
use crate::switching::{SwitchKind, SwitchMove};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnumerationMode {
    /// Row switching plus transposition.
    Q,
    /// Closed row quadruples only.
    QR,
    /// Closed column quadruples only.
    QC,
}

impl std::str::FromStr for EnumerationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "q" => Ok(EnumerationMode::Q),
            "qr" => Ok(EnumerationMode::QR),
            "qc" => Ok(EnumerationMode::QC),
            other => Err(format!("unknown mode {other:?}, expected q, qr or qc")),
        }
    }
}

impl std::fmt::Display for EnumerationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnumerationMode::Q => "q",
            EnumerationMode::QR => "qr",
            EnumerationMode::QC => "qc",
        })
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error("store format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("store was written in mode {stored}, requested {requested}")]
    ModeMismatch { stored: EnumerationMode, requested: EnumerationMode },
    #[error("store holds order {stored}, got order {requested}")]
    OrderMismatch { stored: usize, requested: usize },
    #[error("a store already exists in {0}")]
    AlreadyExists(PathBuf),
}

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("mode {mode} cannot switch matrices of order {order}")]
    WrongOrderClass { mode: EnumerationMode, order: usize },
    #[error("seed is not a Hadamard matrix")]
    InvalidSeed,
    #[error("seed class is not in the existing store")]
    SeedMismatch,
    #[error("building the worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    /// Stop once the store holds this many classes.
    pub limit: Option<usize>,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Skip exploring transpose entries for `n = 4 (mod 8)` in Q mode.
    pub skip_transposes: bool,
    /// Compute per-class statistics and dual pairing in the returned report.
    pub full_report: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            limit: None,
            threads: None,
            skip_transposes: true,
            full_report: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub key: String,
    pub closed_row_quadruples: usize,
    pub closed_column_quadruples: usize,
    pub hall_sets: usize,
    pub self_dual: bool,
}

/// A class and the class of its transposes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualPair {
    pub key: String,
    /// `None` when the class is self-dual.
    pub dual_key: Option<String>,
    pub dual_in_store: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub mode: EnumerationMode,
    pub order: usize,
    pub class_count: usize,
    pub exhausted: bool,
    pub explored: usize,
    /// Filled by [`report`]; empty in the summary returned by [`enumerate`]
    /// unless a full report was requested.
    pub dual_pairing: Vec<DualPair>,
    pub per_class_stats: Vec<ClassStats>,
}

/// The switches enumeration applies to `m` in `mode`, all on field 1.
pub fn switch_moves(m: &HadamardMatrix, mode: EnumerationMode) -> Result<Vec<SwitchMove>, EnumerationError> {
    let n = m.order();
    let (kind, quads) = match (mode, n % 8) {
        (EnumerationMode::Q | EnumerationMode::QR, 0) => (SwitchKind::ClosedRowQuadruple, closed_quadruple_indices(m)),
        (EnumerationMode::QC, 0) => (SwitchKind::ClosedColumnQuadruple, closed_quadruple_indices(&m.transpose())),
        (EnumerationMode::Q, 4) => (
            SwitchKind::HallSet,
            find_hall_sets(m, Axis::Rows).into_iter().map(|q| q.indices).collect(),
        ),
        _ => return Err(EnumerationError::WrongOrderClass { mode, order: n }),
    };
    Ok(quads
        .into_iter()
        .map(|indices| SwitchMove { kind, indices, field: 1 })
        .collect())
}

/// Canonical keys of all switches of one parent, in switch order, with the
/// transpose key of each child not already known.
struct Expansion {
    children: Vec<(CanonicalKey, Option<CanonicalKey>)>,
}

fn expand(parent: &CanonicalKey, mode: EnumerationMode, known: &ClassStore) -> Expansion {
    let m = parent.decode();
    let moves = switch_moves(&m, mode).expect("order class was checked up front");
    let mut transposes: HashMap<CanonicalKey, Option<CanonicalKey>> = HashMap::new();
    let mut children = Vec::with_capacity(moves.len());
    for i in orbit_representatives(&m, &moves) {
        let child = moves[i].apply(&m).expect("move comes from this matrix");
        debug_assert!(child.verify());
        let key = canonical_key(&child);
        let t = if mode == EnumerationMode::Q && !known.contains(&key) {
            transposes
                .entry(key.clone())
                .or_insert_with(|| Some(canonical_key(&child.transpose())))
                .clone()
        } else {
            None
        };
        children.push((key, t));
    }
    Expansion { children }
}

/// One move per orbit of the parent's automorphism group on its closed
/// quadruples, in move order.
///
/// An automorphism carries the field-1 switch of `Q` to a switch of its image
/// on some field, and the class of a closed-quadruple switch does not depend
/// on the field, so each orbit yields one child class. Hall-set moves are all
/// kept.
fn orbit_representatives(m: &HadamardMatrix, moves: &[SwitchMove]) -> Vec<usize> {
    let kind = match moves.first() {
        Some(mv) if mv.kind != SwitchKind::HallSet => mv.kind,
        _ => return (0..moves.len()).collect(),
    };
    let index: HashMap<[usize; 4], usize> = moves.iter().enumerate().map(|(i, mv)| (mv.indices, i)).collect();
    let mut parent: Vec<usize> = (0..moves.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (rows, cols) in canonical_form(m).automorphisms {
        let g = if kind == SwitchKind::ClosedRowQuadruple { rows } else { cols };
        for (i, mv) in moves.iter().enumerate() {
            let mut image = mv.indices.map(|x| g.image(x));
            image.sort_unstable();
            let j = *index.get(&image).expect("automorphisms permute closed quadruples");
            let (a, b) = (root(&mut parent, i), root(&mut parent, j));
            // keep the earliest move as the root
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..moves.len()).filter(|&i| root(&mut parent, i) == i).collect()
}

fn check_mode(order: usize, mode: EnumerationMode) -> Result<(), EnumerationError> {
    match (mode, order % 8) {
        (_, 0) | (EnumerationMode::Q, 4) => Ok(()),
        _ => Err(EnumerationError::WrongOrderClass { mode, order }),
    }
}

/// Runs (or continues) the enumeration of the class of `seed` into `store`.
pub fn enumerate(
    seed: &HadamardMatrix,
    mode: EnumerationMode,
    store: &mut ClassStore,
    options: &EnumerationOptions,
) -> Result<EnumerationReport, EnumerationError> {
    if !seed.verify() {
        return Err(EnumerationError::InvalidSeed);
    }
    let n = seed.order();
    check_mode(n, mode)?;
    if store.mode() != mode {
        return Err(StoreError::ModeMismatch { stored: store.mode(), requested: mode }.into());
    }
    if store.order() != n {
        return Err(StoreError::OrderMismatch { stored: store.order(), requested: n }.into());
    }
    let seed_key = canonical_key(seed);
    let at_limit = |s: &ClassStore| options.limit.is_some_and(|l| s.len() >= l);
    if store.is_empty() {
        store.insert(seed_key.clone(), 0)?;
        store.add_seed(&seed_key)?;
        if mode == EnumerationMode::Q && !at_limit(store) {
            let t = canonical_key(&seed.transpose());
            store.insert(t, FLAG_TRANSPOSE_OF_PREVIOUS)?;
        }
        store.snapshot()?;
    } else if !store.contains(&seed_key) {
        return Err(EnumerationError::SeedMismatch);
    } else {
        store.add_seed(&seed_key)?;
    }

    let skip = options.skip_transposes && mode == EnumerationMode::Q && n % 8 == 4;
    let pool = match options.threads {
        Some(t) if t > 1 => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| EnumerationError::ThreadPool(e.to_string()))?,
        ),
        None => None,
        Some(_) => None,
    };
    let parallel = options.threads.is_none_or(|t| t > 1);
    let batch_size = if parallel { 4 * options.threads.unwrap_or_else(rayon::current_num_threads).max(1) } else { 1 };

    while !store.is_exhausted() && !at_limit(store) {
        let start = store.explored();
        let end = (start + batch_size).min(store.len());
        let parents: Vec<(usize, CanonicalKey)> = (start..end).map(|i| (i, store.keys()[i].clone())).collect();
        let skipped = |i: usize| skip && store.flags(i) & FLAG_TRANSPOSE_OF_PREVIOUS != 0;
        let work = |&(i, ref key): &(usize, CanonicalKey)| -> Option<Expansion> {
            if skipped(i) {
                None
            } else {
                Some(expand(key, mode, store))
            }
        };
        let expansions: Vec<Option<Expansion>> = if parallel {
            match &pool {
                Some(p) => p.install(|| parents.par_iter().map(work).collect()),
                None => parents.par_iter().map(work).collect(),
            }
        } else {
            parents.iter().map(work).collect()
        };
        'merge: for ((i, _), exp) in parents.iter().zip(expansions) {
            if let Some(exp) = exp {
                for (key, transpose) in exp.children {
                    if at_limit(store) {
                        break 'merge;
                    }
                    if store.insert(key.clone(), 0)? && mode == EnumerationMode::Q && !at_limit(store) {
                        let t = transpose.expect("transposes are computed for unknown children");
                        if t != key {
                            store.insert(t, FLAG_TRANSPOSE_OF_PREVIOUS)?;
                        }
                    }
                }
            }
            store.mark_explored(i + 1);
        }
        store.snapshot()?;
    }
    store.snapshot()?;
    if options.full_report {
        Ok(report(store))
    } else {
        Ok(summary(store))
    }
}

fn summary(store: &ClassStore) -> EnumerationReport {
    EnumerationReport {
        mode: store.mode(),
        order: store.order(),
        class_count: store.len(),
        exhausted: store.is_exhausted(),
        explored: store.explored(),
        dual_pairing: Vec::new(),
        per_class_stats: Vec::new(),
    }
}

/// Groups the store's classes with their transpose classes. Self-dual
/// classes appear alone; each other pair appears once, keyed by the smaller
/// key. Sorted by key.
pub fn partition_dual_pairs(store: &ClassStore) -> Vec<DualPair> {
    let duals: Vec<CanonicalKey> = store.keys().par_iter().map(|k| canonical_key(&k.decode().transpose())).collect();
    dual_pairs_from(store, &duals)
}

fn dual_pairs_from(store: &ClassStore, duals: &[CanonicalKey]) -> Vec<DualPair> {
    let mut out: Vec<DualPair> = store
        .keys()
        .iter()
        .zip(duals)
        .filter(|(k, d)| k <= d || !store.contains(d))
        .map(|(k, d)| DualPair {
            key: k.to_hex(),
            dual_key: (k != d).then(|| d.to_hex()),
            dual_in_store: store.contains(d),
        })
        .collect();
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out
}

/// Full report: counts, per-class statistics and dual pairing, sorted by key.
pub fn report(store: &ClassStore) -> EnumerationReport {
    let n = store.order();
    let duals: Vec<CanonicalKey> = store.keys().par_iter().map(|k| canonical_key(&k.decode().transpose())).collect();
    let mut stats: Vec<ClassStats> = store
        .keys()
        .par_iter()
        .zip(duals.par_iter())
        .map(|(k, d)| {
            let m = k.decode();
            let hall_sets = if n % 8 == 4 { find_hall_sets(&m, Axis::Rows).len() } else { 0 };
            ClassStats {
                key: k.to_hex(),
                closed_row_quadruples: count_closed_quadruples(&m, Axis::Rows),
                closed_column_quadruples: count_closed_quadruples(&m, Axis::Columns),
                hall_sets,
                self_dual: k == d,
            }
        })
        .collect();
    stats.sort_by(|a, b| a.key.cmp(&b.key));
    EnumerationReport {
        dual_pairing: dual_pairs_from(store, &duals),
        per_class_stats: stats,
        ..summary(store)
    }
}
