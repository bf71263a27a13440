//! Backend-neutral snapshot files.
//!
//! ```text
//! "QCSNAP01" version:u32 wl_iterations:u32 count:u64 record*
//! ```
//!
//! Records use the framing of [`super::record`], sorted by hash then
//! payload kind, so a store exports to the same bytes every time.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{record, sort_entries, CacheEntry, Store, StoreError};

pub const MAGIC: &[u8; 8] = b"QCSNAP01";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub wl_iterations: u32,
    pub entries: Vec<CacheEntry>,
}

impl Snapshot {
    pub fn new(wl_iterations: u32, mut entries: Vec<CacheEntry>) -> Snapshot {
        sort_entries(&mut entries);
        entries.dedup_by(|a, b| a.id() == b.id());
        Snapshot {
            wl_iterations,
            entries,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_be_bytes());
        out.extend_from_slice(&self.wl_iterations.to_be_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_be_bytes());
        for e in &self.entries {
            record::encode_into(e, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Snapshot, StoreError> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return Err(StoreError::BadMagic);
        }
        let word = |at: usize| u32::from_be_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        let version = word(8);
        if version != VERSION {
            return Err(StoreError::Version {
                found: version,
                expected: VERSION,
            });
        }
        let wl_iterations = word(12);
        let count = u64::from_be_bytes(bytes[16..24].try_into().expect("8 bytes"));
        let mut entries: Vec<CacheEntry> = Vec::new();
        let mut pos = HEADER_LEN;
        for index in 0..count {
            let at = |source: StoreError| StoreError::Record {
                index,
                source: Box::new(source),
            };
            let (e, n) = record::decode(&bytes[pos..]).map_err(at)?;
            if let Some(prev) = entries.last() {
                if (&prev.key.hash, prev.key.payload_kind) >= (&e.key.hash, e.key.payload_kind) {
                    return Err(at(StoreError::Corrupt(
                        "records out of order or duplicated".into(),
                    )));
                }
            }
            entries.push(e);
            pos += n;
        }
        if pos != bytes.len() {
            return Err(StoreError::Corrupt(format!(
                "{} bytes after the last of {count} records",
                bytes.len() - pos
            )));
        }
        Ok(Snapshot {
            wl_iterations,
            entries,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        let tmp = path.with_extension("partial");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&self.to_bytes())?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Snapshot, StoreError> {
        Snapshot::from_bytes(&fs::read(path)?)
    }
}

/// Flushes `store` and writes every entry to `path`. Returns the record
/// count.
pub fn export(store: &dyn Store, wl_iterations: u32, path: &Path) -> Result<usize, StoreError> {
    store.flush()?;
    let snap = Snapshot::new(wl_iterations, store.entries()?);
    snap.write(path)?;
    Ok(snap.entries.len())
}

/// Loads `path` into `store`, refusing snapshots hashed with a different
/// WL depth. Returns how many records were new to the store.
pub fn import(store: &dyn Store, wl_iterations: u32, path: &Path) -> Result<usize, StoreError> {
    let snap = Snapshot::read(path)?;
    if snap.wl_iterations != wl_iterations {
        return Err(StoreError::WlIterations {
            found: snap.wl_iterations,
            expected: wl_iterations,
        });
    }
    store.import(snap.entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::{CacheKey, PayloadKind};
    use crate::store::Payload;

    fn entry(i: u64, kind: PayloadKind) -> CacheEntry {
        let key = CacheKey {
            hash: format!("{:016x}", i * 0x9e37_79b9),
            n_qubits: 1,
            interior_spiders: 2,
            payload_kind: kind,
        };
        let payload = match kind {
            PayloadKind::Full => Payload::Full(vec![i as u8; 32]),
            PayloadKind::Compact => Payload::Compact(i as f64 / 3.0),
        };
        CacheEntry {
            key,
            payload,
            backend_tag: "sv".into(),
            shots: i.is_multiple_of(2).then_some(i),
            created_at_ms: i as i64,
        }
    }

    #[test]
    fn empty_snapshot_has_only_a_header() {
        let bytes = Snapshot::new(3, vec![]).to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(
            Snapshot::from_bytes(&bytes).unwrap(),
            Snapshot::new(3, vec![])
        );
    }

    #[test]
    fn sorted_and_round_trips() {
        let entries: Vec<_> = (0..20)
            .rev()
            .map(|i| {
                entry(
                    i,
                    if i % 3 == 0 {
                        PayloadKind::Full
                    } else {
                        PayloadKind::Compact
                    },
                )
            })
            .collect();
        let snap = Snapshot::new(3, entries.clone());
        let mut shuffled = entries;
        shuffled.reverse();
        assert_eq!(Snapshot::new(3, shuffled).to_bytes(), snap.to_bytes());
        assert_eq!(Snapshot::from_bytes(&snap.to_bytes()).unwrap(), snap);
    }

    #[test]
    fn tampering_names_the_record() {
        let snap = Snapshot::new(3, (0..5).map(|i| entry(i, PayloadKind::Compact)).collect());
        let mut bytes = snap.to_bytes();
        let end_of_2: usize = HEADER_LEN
            + snap.entries[..3]
                .iter()
                .map(|e| record::encode(e).len())
                .sum::<usize>();
        // Last payload byte of record 2.
        bytes[end_of_2 - 5] ^= 1;
        match Snapshot::from_bytes(&bytes) {
            Err(StoreError::Record { index, source }) => {
                assert_eq!(index, 2);
                assert!(matches!(*source, StoreError::Checksum));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_checks() {
        let mut bytes = Snapshot::new(3, vec![]).to_bytes();
        bytes[11] = 2;
        assert!(matches!(
            Snapshot::from_bytes(&bytes),
            Err(StoreError::Version { found: 2, .. })
        ));
        assert!(matches!(
            Snapshot::from_bytes(b"nope"),
            Err(StoreError::BadMagic)
        ));
    }
}
