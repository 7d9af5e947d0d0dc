//! Directory-backed class store.
//!
//! Layout of a store directory:
//! - `meta.json`: format version, mode, order, seed keys.
//! - `keys.log`: append-only records
//!   `[u64 fingerprint][u16 key length][key bytes][u8 flags]`, big-endian.
//! - `frontier.snap`: JSON `{ "explored": .., "classes": .. }`, replaced
//!   atomically after the log has been synced.
//!
//! Keys `0..explored` have been fully processed; the rest form the FIFO
//! frontier. A record appended after the last snapshot belongs to a parent
//! whose processing is redone on resume, which is harmless because inserts
//! are idempotent.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EnumerationMode, StoreError};
use crate::canonical::CanonicalKey;

pub const STORE_VERSION: u32 = 1;

const META_FILE: &str = "meta.json";
const LOG_FILE: &str = "keys.log";
const SNAP_FILE: &str = "frontier.snap";

/// Record flag: the key was inserted as the transpose class of the key just
/// before it.
pub const FLAG_TRANSPOSE_OF_PREVIOUS: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub version: u32,
    pub mode: EnumerationMode,
    pub order: usize,
    pub seeds: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Snapshot {
    explored: usize,
    classes: usize,
}

struct Persistence {
    dir: PathBuf,
    log: File,
}

pub struct ClassStore {
    meta: StoreMeta,
    keys: Vec<CanonicalKey>,
    flags: Vec<u8>,
    index: HashMap<u64, Vec<u32>>,
    explored: usize,
    persistence: Option<Persistence>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl ClassStore {
    /// A store that lives only in memory.
    pub fn in_memory(mode: EnumerationMode, order: usize) -> ClassStore {
        ClassStore {
            meta: StoreMeta {
                version: STORE_VERSION,
                mode,
                order,
                seeds: Vec::new(),
            },
            keys: Vec::new(),
            flags: Vec::new(),
            index: HashMap::new(),
            explored: 0,
            persistence: None,
        }
    }

    /// Creates a new store in `dir`, which must not already hold one.
    pub fn create(dir: &Path, mode: EnumerationMode, order: usize) -> Result<ClassStore, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let meta_path = dir.join(META_FILE);
        if meta_path.exists() {
            return Err(StoreError::AlreadyExists(dir.to_path_buf()));
        }
        let mut store = ClassStore::in_memory(mode, order);
        let log_path = dir.join(LOG_FILE);
        let log = OpenOptions::new()
            .create(true)
            .truncate(true)
            .write(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        store.persistence = Some(Persistence { dir: dir.to_path_buf(), log });
        store.write_meta()?;
        store.snapshot()?;
        Ok(store)
    }

    /// Reopens a store, dropping a partially written trailing record.
    pub fn resume(dir: &Path) -> Result<ClassStore, StoreError> {
        let meta_path = dir.join(META_FILE);
        let text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
        let meta: StoreMeta = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt(format!("{}: {e}", meta_path.display())))?;
        if meta.version != STORE_VERSION {
            return Err(StoreError::VersionMismatch { found: meta.version, expected: STORE_VERSION });
        }
        let log_path = dir.join(LOG_FILE);
        let mut bytes = Vec::new();
        File::open(&log_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(io_err(&log_path))?;
        let mut store = ClassStore::in_memory(meta.mode, meta.order);
        store.meta = meta;
        let mut at = 0;
        let mut complete = 0;
        while at + 10 <= bytes.len() {
            let fp = u64::from_be_bytes(bytes[at..at + 8].try_into().unwrap());
            let len = u16::from_be_bytes(bytes[at + 8..at + 10].try_into().unwrap()) as usize;
            if at + 10 + len + 1 > bytes.len() {
                break;
            }
            let key = CanonicalKey::from_bytes(bytes[at + 10..at + 10 + len].to_vec())
                .map_err(|e| StoreError::Corrupt(format!("record {}: {e}", store.keys.len())))?;
            if key.fingerprint() != fp {
                return Err(StoreError::Corrupt(format!("record {}: fingerprint mismatch", store.keys.len())));
            }
            if key.order() != store.meta.order {
                return Err(StoreError::Corrupt(format!("record {}: order {}", store.keys.len(), key.order())));
            }
            let flags = bytes[at + 10 + len];
            if store.contains(&key) {
                return Err(StoreError::Corrupt(format!("record {}: duplicate key", store.keys.len())));
            }
            store.push(key, flags);
            at += 10 + len + 1;
            complete = at;
        }
        let log = OpenOptions::new().append(true).open(&log_path).map_err(io_err(&log_path))?;
        if complete < bytes.len() {
            log.set_len(complete as u64).map_err(io_err(&log_path))?;
        }
        let snap_path = dir.join(SNAP_FILE);
        let snap: Snapshot = match fs::read_to_string(&snap_path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| StoreError::Corrupt(format!("{}: {e}", snap_path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Snapshot { explored: 0, classes: 0 },
            Err(e) => return Err(io_err(&snap_path)(e)),
        };
        if snap.classes > store.keys.len() || snap.explored > snap.classes {
            return Err(StoreError::Corrupt(format!(
                "snapshot records {} classes ({} explored) but the log holds {}",
                snap.classes,
                snap.explored,
                store.keys.len()
            )));
        }
        store.explored = snap.explored;
        store.persistence = Some(Persistence { dir: dir.to_path_buf(), log });
        Ok(store)
    }

    /// Reopens `dir` if it holds a store, otherwise creates one.
    pub fn open_or_create(dir: &Path, mode: EnumerationMode, order: usize) -> Result<ClassStore, StoreError> {
        if dir.join(META_FILE).exists() {
            let store = ClassStore::resume(dir)?;
            if store.meta.mode != mode {
                return Err(StoreError::ModeMismatch { stored: store.meta.mode, requested: mode });
            }
            if store.meta.order != order {
                return Err(StoreError::OrderMismatch { stored: store.meta.order, requested: order });
            }
            Ok(store)
        } else {
            ClassStore::create(dir, mode, order)
        }
    }

    fn push(&mut self, key: CanonicalKey, flags: u8) {
        self.index.entry(key.fingerprint()).or_default().push(self.keys.len() as u32);
        self.keys.push(key);
        self.flags.push(flags);
    }

    pub fn meta(&self) -> &StoreMeta {
        &self.meta
    }

    pub fn mode(&self) -> EnumerationMode {
        self.meta.mode
    }

    pub fn order(&self) -> usize {
        self.meta.order
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Keys in insertion order.
    pub fn keys(&self) -> &[CanonicalKey] {
        &self.keys
    }

    pub fn flags(&self, i: usize) -> u8 {
        self.flags[i]
    }

    pub fn explored(&self) -> usize {
        self.explored
    }

    pub fn frontier(&self) -> &[CanonicalKey] {
        &self.keys[self.explored..]
    }

    pub fn is_exhausted(&self) -> bool {
        self.explored == self.keys.len()
    }

    pub fn contains(&self, key: &CanonicalKey) -> bool {
        self.position(key).is_some()
    }

    pub fn position(&self, key: &CanonicalKey) -> Option<usize> {
        self.index
            .get(&key.fingerprint())?
            .iter()
            .map(|&i| i as usize)
            .find(|&i| self.keys[i] == *key)
    }

    /// Appends `key` unless present; returns whether it was new.
    pub fn insert(&mut self, key: CanonicalKey, flags: u8) -> Result<bool, StoreError> {
        if key.order() != self.meta.order {
            return Err(StoreError::OrderMismatch { stored: self.meta.order, requested: key.order() });
        }
        if self.contains(&key) {
            return Ok(false);
        }
        if let Some(p) = &mut self.persistence {
            let mut rec = Vec::with_capacity(key.as_bytes().len() + 11);
            rec.extend_from_slice(&key.fingerprint().to_be_bytes());
            rec.extend_from_slice(&(key.as_bytes().len() as u16).to_be_bytes());
            rec.extend_from_slice(key.as_bytes());
            rec.push(flags);
            let path = p.dir.join(LOG_FILE);
            p.log.write_all(&rec).map_err(io_err(&path))?;
        }
        self.push(key, flags);
        Ok(true)
    }

    pub(crate) fn add_seed(&mut self, key: &CanonicalKey) -> Result<(), StoreError> {
        let hex = key.to_hex();
        if !self.meta.seeds.contains(&hex) {
            self.meta.seeds.push(hex);
            self.write_meta()?;
        }
        Ok(())
    }

    pub(crate) fn mark_explored(&mut self, upto: usize) {
        debug_assert!(upto <= self.keys.len());
        self.explored = upto;
    }

    fn write_meta(&self) -> Result<(), StoreError> {
        let Some(p) = &self.persistence else { return Ok(()) };
        let text = serde_json::to_string_pretty(&self.meta).expect("meta serializes");
        atomic_write(&p.dir.join(META_FILE), text.as_bytes())
    }

    /// Syncs the log, then atomically replaces the frontier snapshot.
    pub fn snapshot(&mut self) -> Result<(), StoreError> {
        let Some(p) = &mut self.persistence else { return Ok(()) };
        let log_path = p.dir.join(LOG_FILE);
        p.log.flush().map_err(io_err(&log_path))?;
        p.log.sync_data().map_err(io_err(&log_path))?;
        let snap = Snapshot {
            explored: self.explored,
            classes: self.keys.len(),
        };
        let text = serde_json::to_string(&snap).expect("snapshot serializes");
        atomic_write(&p.dir.join(SNAP_FILE), text.as_bytes())
    }

    pub fn directory(&self) -> Option<&Path> {
        self.persistence.as_ref().map(|p| p.dir.as_path())
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}
