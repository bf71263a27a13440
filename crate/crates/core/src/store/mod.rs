//! Result stores keyed by [`CacheKey`].
//!
//! Three backends share the [`Store`] trait: [`MemoryStore`] (process
//! local), [`EmbeddedStore`] (memory-mapped file fed by a queue directory and
//! one writer thread) and [`NetworkedStore`] (client of the in-repo
//! [`Server`]). Entries are addressed by hash and payload kind; the other key
//! fields are checked on every lookup so that a hash collision reads as a
//! miss.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::identity::{CacheKey, PayloadKind};
use crate::sim::full_payload_len;

mod embedded;
mod memory;
mod net;
pub mod record;
pub mod snapshot;

pub use embedded::{EmbeddedOptions, EmbeddedStore};
pub use memory::MemoryStore;
pub use net::{NetworkedStore, Server, ServerHandle};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("store at {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("connection refused by {0}")]
    Refused(String),
    #[error("timed out talking to {0}")]
    Timeout(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("server error: {0}")]
    Server(String),
    #[error("record checksum mismatch")]
    Checksum,
    #[error("record truncated")]
    Truncated,
    #[error("corrupt record: {0}")]
    Corrupt(String),
    #[error("record {index}: {source}")]
    Record { index: u64, source: Box<StoreError> },
    #[error("not a snapshot (bad magic)")]
    BadMagic,
    #[error("snapshot version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("snapshot built with {found} WL iterations, store uses {expected}")]
    WlIterations { found: u32, expected: u32 },
    #[error("invalid entry: {0}")]
    Invalid(String),
    #[error("writer thread has stopped")]
    WriterGone,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// Statevector bytes in the simulator's payload layout.
    Full(Vec<u8>),
    /// One expectation value.
    Compact(f64),
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Full(_) => PayloadKind::Full,
            Payload::Compact(_) => PayloadKind::Compact,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::Full(b) => b.len(),
            Payload::Compact(_) => 8,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub payload: Payload,
    pub backend_tag: String,
    pub shots: Option<u64>,
    pub created_at_ms: i64,
}

impl CacheEntry {
    /// Entry stamped with the current time.
    pub fn new(key: CacheKey, payload: Payload, backend_tag: impl Into<String>) -> CacheEntry {
        let created_at_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as i64)
            .unwrap_or(0);
        CacheEntry {
            key,
            payload,
            backend_tag: backend_tag.into(),
            shots: None,
            created_at_ms,
        }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if !self.key.is_well_formed() {
            return Err(StoreError::Invalid(format!(
                "malformed hash {:?}",
                self.key.hash
            )));
        }
        if self.payload.kind() != self.key.payload_kind {
            return Err(StoreError::Invalid(format!(
                "{} payload under a {} key",
                self.payload.kind(),
                self.key.payload_kind
            )));
        }
        if let Payload::Full(bytes) = &self.payload {
            let want =
                (self.key.n_qubits < 40).then(|| full_payload_len(self.key.n_qubits as usize));
            if want != Some(bytes.len()) {
                return Err(StoreError::Invalid(format!(
                    "{} payload bytes for {} qubits",
                    bytes.len(),
                    self.key.n_qubits
                )));
            }
        }
        if self.backend_tag.len() > u8::MAX as usize {
            return Err(StoreError::Invalid(
                "backend tag longer than 255 bytes".into(),
            ));
        }
        Ok(())
    }

    /// Identity within a store.
    pub fn id(&self) -> (String, PayloadKind) {
        (self.key.hash.clone(), self.key.payload_kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PutOutcome {
    Inserted,
    AlreadyPresent,
}

/// Counters kept by a store since it was opened (for the networked backend,
/// since the server started).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub calls: u64,
    pub hits: u64,
    pub misses: u64,
    pub stores: u64,
    pub extra_simulations: u64,
    pub unique_entries: u64,
}

impl CacheStats {
    pub fn to_words(self) -> [u64; 6] {
        [
            self.calls,
            self.hits,
            self.misses,
            self.stores,
            self.extra_simulations,
            self.unique_entries,
        ]
    }

    pub fn from_words(w: [u64; 6]) -> CacheStats {
        CacheStats {
            calls: w[0],
            hits: w[1],
            misses: w[2],
            stores: w[3],
            extra_simulations: w[4],
            unique_entries: w[5],
        }
    }

    pub fn hit_rate(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.hits as f64 / self.calls as f64
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct Counters {
    calls: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
    stores: AtomicU64,
    extra: AtomicU64,
    unique: AtomicU64,
}

impl Counters {
    pub(crate) fn lookup(&self, hit: bool) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        if hit {
            self.hits.fetch_add(1, Ordering::Relaxed);
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub(crate) fn put(&self, outcome: PutOutcome) {
        self.stores.fetch_add(1, Ordering::Relaxed);
        match outcome {
            PutOutcome::Inserted => self.unique.fetch_add(1, Ordering::Relaxed),
            PutOutcome::AlreadyPresent => self.extra.fetch_add(1, Ordering::Relaxed),
        };
    }

    pub(crate) fn snapshot(&self) -> CacheStats {
        CacheStats {
            calls: self.calls.load(Ordering::Relaxed),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            stores: self.stores.load(Ordering::Relaxed),
            extra_simulations: self.extra.load(Ordering::Relaxed),
            unique_entries: self.unique.load(Ordering::Relaxed),
        }
    }
}

/// Shared result store. Handles are used from many worker threads at once.
pub trait Store: Send + Sync {
    /// Entry under `key`'s hash and payload kind, if its metadata also
    /// matches `key`. Counts a hit or a miss.
    fn get(&self, key: &CacheKey) -> Result<Option<CacheEntry>, StoreError>;

    /// Atomically inserts `entry` unless its id is already taken (or, for
    /// the embedded backend, already queued).
    fn put_if_absent(&self, entry: CacheEntry) -> Result<PutOutcome, StoreError>;

    fn stats(&self) -> Result<CacheStats, StoreError>;

    /// Every committed entry, sorted by hash then payload kind.
    fn entries(&self) -> Result<Vec<CacheEntry>, StoreError>;

    /// Waits until every accepted write is durable and visible to readers.
    fn flush(&self) -> Result<(), StoreError> {
        Ok(())
    }

    /// Short backend name for reports.
    fn backend(&self) -> &'static str;

    /// Inserts `entries` through [`Store::put_if_absent`] and flushes; returns
    /// how many were new.
    fn import(&self, entries: Vec<CacheEntry>) -> Result<usize, StoreError> {
        let mut inserted = 0;
        for e in entries {
            if self.put_if_absent(e)? == PutOutcome::Inserted {
                inserted += 1;
            }
        }
        self.flush()?;
        Ok(inserted)
    }
}

/// Lookup result check shared by the backends.
pub(crate) fn accept(found: Option<CacheEntry>, key: &CacheKey) -> Option<CacheEntry> {
    let e = found?;
    if e.key.metadata_matches(key) {
        Some(e)
    } else {
        log::warn!(
            "hash {} found with mismatched metadata (stored {}, wanted {}); treating as a miss",
            key.hash,
            e.key,
            key
        );
        None
    }
}

pub(crate) fn sort_entries(v: &mut [CacheEntry]) {
    v.sort_by(|a, b| (&a.key.hash, a.key.payload_kind).cmp(&(&b.key.hash, b.key.payload_kind)));
}
