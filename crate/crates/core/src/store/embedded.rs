//! Single-writer store: a memory-mapped append-only data file, a queue
//! directory of pending records and one writer thread that moves queued
//! records into the data file.
//!
//! Layout of the store directory:
//!
//! ```text
//! data.qcdb            "QCDB0001" followed by framed records
//! queue/<hash>.<nonce>.qent
//! writer.lock          held (advisory lock) by the writer process
//! ```
//!
//! A handle opened with [`EmbeddedStore::open`] owns the writer. Handles from
//! [`EmbeddedStore::open_shared`] (other processes) read the data file and
//! enqueue records for whichever process holds the writer.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use memmap2::Mmap;

use crate::identity::{CacheKey, PayloadKind};

use super::{
    accept, record, sort_entries, CacheEntry, CacheStats, Counters, PutOutcome, Store, StoreError,
};

const DATA_MAGIC: &[u8; 8] = b"QCDB0001";
const DATA_FILE: &str = "data.qcdb";
const QUEUE_DIR: &str = "queue";
const LOCK_FILE: &str = "writer.lock";
const QUEUE_EXT: &str = "qent";
/// Upper bound on how long an in-process put waits for its commit.
const COMMIT_WAIT: Duration = Duration::from_secs(5);

type Id = (String, PayloadKind);

#[derive(Clone, Debug)]
pub struct EmbeddedOptions {
    /// How often the writer scans the queue directory.
    pub poll_interval: Duration,
    /// `fsync` queue files before renaming them into place.
    pub sync_queue_files: bool,
    /// Make in-process puts return only after the writer has committed
    /// them. Off, puts return as soon as the queue file is in place.
    pub wait_for_commit: bool,
}

impl Default for EmbeddedOptions {
    fn default() -> EmbeddedOptions {
        EmbeddedOptions {
            poll_interval: Duration::from_millis(10),
            sync_queue_files: false,
            wait_for_commit: true,
        }
    }
}

/// Committed records as seen through the current mapping.
#[derive(Default)]
struct View {
    map: Option<Mmap>,
    /// Bytes of the data file covered by complete records.
    valid_len: usize,
    index: HashMap<Id, (usize, usize)>,
}

impl View {
    fn bytes(&self) -> &[u8] {
        self.map.as_deref().unwrap_or(&[])
    }

    /// Remaps `file` and indexes whole records past `valid_len`. A partial
    /// or corrupt tail is left unindexed.
    fn refresh(&mut self, file: &File) -> Result<(), StoreError> {
        let len = file.metadata()?.len() as usize;
        if self.map.as_ref().is_some_and(|m| m.len() == len) {
            return Ok(());
        }
        // SAFETY: the data file is only ever appended to, and only by the
        // writer; bytes already mapped never change underneath a reader.
        let map = unsafe { Mmap::map(file)? };
        let mut pos = self.valid_len.max(DATA_MAGIC.len());
        while pos < map.len() {
            let Ok(n) = record::frame_len(&map[pos..]) else {
                break;
            };
            let id = record::peek_id(&map[pos..])?;
            self.index.entry(id).or_insert((pos, n));
            pos += n;
        }
        self.valid_len = pos;
        self.map = Some(map);
        Ok(())
    }

    fn get(&self, id: &Id) -> Result<Option<CacheEntry>, StoreError> {
        match self.index.get(id) {
            Some(&(off, len)) => Ok(Some(record::decode(&self.bytes()[off..off + len])?.0)),
            None => Ok(None),
        }
    }
}

struct Shared {
    data: File,
    queue: PathBuf,
    view: RwLock<View>,
    /// Ids accepted by this handle and not yet visible in `view`.
    pending: Mutex<HashSet<Id>>,
    /// Signalled whenever the writer clears ids from `pending`.
    committed: Condvar,
}

impl Shared {
    fn refresh(&self) -> Result<(), StoreError> {
        let mut v = self.view.write().expect("view lock");
        v.refresh(&self.data)?;
        Ok(())
    }

    fn is_committed(&self, id: &Id) -> bool {
        self.view.read().expect("view lock").index.contains_key(id)
    }

    /// Moves every queued record into the data file. Returns how many new
    /// records were committed.
    fn consume(&self) -> Result<usize, StoreError> {
        let mut names: Vec<PathBuf> = fs::read_dir(&self.queue)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == QUEUE_EXT))
            .collect();
        if names.is_empty() {
            return Ok(0);
        }
        names.sort();
        let mut batch = Vec::new();
        let mut batched = HashSet::new();
        let mut seen = Vec::new();
        for path in &names {
            let bytes = match fs::read(path) {
                Ok(b) => b,
                Err(e) => {
                    log::warn!("skipping queue file {}: {e}", path.display());
                    continue;
                }
            };
            match record::frame_len(&bytes).and_then(|n| {
                if n == bytes.len() {
                    record::peek_id(&bytes)
                } else {
                    Err(StoreError::Corrupt("trailing bytes".into()))
                }
            }) {
                Ok(id) => {
                    if !self.is_committed(&id) && !batched.contains(&id) {
                        batch.extend_from_slice(&bytes);
                        batched.insert(id.clone());
                    }
                    seen.push(id);
                }
                Err(e) => log::warn!("dropping bad queue file {}: {e}", path.display()),
            }
        }
        if !batch.is_empty() {
            (&self.data).write_all(&batch)?;
            self.data.sync_data()?;
            self.refresh()?;
        }
        {
            let mut pending = self.pending.lock().expect("pending lock");
            for id in &seen {
                pending.remove(id);
            }
        }
        self.committed.notify_all();
        for path in &names {
            if let Err(e) = fs::remove_file(path) {
                log::warn!("could not remove {}: {e}", path.display());
            }
        }
        Ok(batched.len())
    }

    /// Blocks until the writer has committed `id`, or `limit` has passed.
    fn wait_committed(&self, id: &Id, limit: Duration) -> bool {
        let deadline = Instant::now() + limit;
        let mut pending = self.pending.lock().expect("pending lock");
        while pending.contains(id) {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return false;
            }
            pending = self
                .committed
                .wait_timeout(pending, left)
                .expect("pending lock")
                .0;
        }
        true
    }
}

enum Msg {
    /// Something was queued by this process; commit without waiting for the
    /// next poll.
    Wake,
    Drain(Sender<Result<usize, StoreError>>),
    Stop,
}

struct Writer {
    tx: Sender<Msg>,
    thread: Option<JoinHandle<()>>,
    _lock: File,
}

pub struct EmbeddedStore {
    dir: PathBuf,
    shared: Arc<Shared>,
    writer: Option<Mutex<Writer>>,
    options: EmbeddedOptions,
    counters: Counters,
    nonce: AtomicU64,
}

impl EmbeddedStore {
    /// Opens (creating if needed) the store in `dir` and starts its writer.
    /// Fails with [`StoreError::Locked`] if another handle owns the writer.
    pub fn open(dir: impl AsRef<Path>) -> Result<EmbeddedStore, StoreError> {
        EmbeddedStore::open_with(dir, EmbeddedOptions::default())
    }

    pub fn open_with(
        dir: impl AsRef<Path>,
        options: EmbeddedOptions,
    ) -> Result<EmbeddedStore, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join(QUEUE_DIR))?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK_FILE))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(StoreError::Locked(dir)),
            Err(TryLockError::Error(e)) => return Err(e.into()),
        }
        let data = open_data(&dir, true)?;
        let mut store = EmbeddedStore::with_data(dir, data, options)?;
        store.drop_torn_tail()?;
        clear_temp_files(&store.shared.queue)?;

        let (tx, rx) = mpsc::channel::<Msg>();
        let shared = Arc::clone(&store.shared);
        let poll = store.options.poll_interval;
        let thread = std::thread::Builder::new()
            .name("qcache-writer".into())
            .spawn(move || loop {
                let msg = rx.recv_timeout(poll);
                let result = shared.consume();
                if let Err(e) = &result {
                    log::error!("embedded writer: {e}");
                }
                match msg {
                    Ok(Msg::Drain(reply)) => {
                        let _ = reply.send(result);
                    }
                    Ok(Msg::Stop) | Err(RecvTimeoutError::Disconnected) => break,
                    Ok(Msg::Wake) | Err(RecvTimeoutError::Timeout) => {}
                }
            })?;
        store.writer = Some(Mutex::new(Writer {
            tx,
            thread: Some(thread),
            _lock: lock,
        }));
        Ok(store)
    }

    /// Reader and enqueuer for a store whose writer lives in another
    /// process. Records put here become visible once that writer commits
    /// them.
    pub fn open_shared(dir: impl AsRef<Path>) -> Result<EmbeddedStore, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join(QUEUE_DIR))?;
        let data = open_data(&dir, false)?;
        EmbeddedStore::with_data(dir, data, EmbeddedOptions::default())
    }

    fn with_data(
        dir: PathBuf,
        data: File,
        options: EmbeddedOptions,
    ) -> Result<EmbeddedStore, StoreError> {
        let shared = Arc::new(Shared {
            data,
            queue: dir.join(QUEUE_DIR),
            view: RwLock::new(View::default()),
            pending: Mutex::new(HashSet::new()),
            committed: Condvar::new(),
        });
        shared.refresh()?;
        Ok(EmbeddedStore {
            dir,
            shared,
            writer: None,
            options,
            counters: Counters::default(),
            nonce: AtomicU64::new(0),
        })
    }

    /// Cuts off a partially written record left by a crash.
    fn drop_torn_tail(&mut self) -> Result<(), StoreError> {
        let mut v = self.shared.view.write().expect("view lock");
        let len = v.bytes().len();
        if v.valid_len < len {
            log::warn!(
                "truncating {} bytes of incomplete records from {}",
                len - v.valid_len,
                self.dir.display()
            );
            v.map = None;
            self.shared.data.set_len(v.valid_len as u64)?;
            self.shared.data.sync_data()?;
            v.refresh(&self.shared.data)?;
        }
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn is_writer(&self) -> bool {
        self.writer.is_some()
    }

    /// Committed records.
    pub fn len(&self) -> usize {
        self.shared.view.read().expect("view lock").index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of the data file in bytes.
    pub fn data_len(&self) -> Result<u64, StoreError> {
        Ok(self.shared.data.metadata()?.len())
    }

    /// Records accepted by this handle but not yet committed.
    pub fn pending(&self) -> usize {
        self.shared.pending.lock().expect("pending lock").len()
    }

    fn enqueue(&self, bytes: &[u8], hash: &str) -> Result<(), StoreError> {
        let n = self.nonce.fetch_add(1, Ordering::Relaxed);
        let stem = format!("{hash}.{:x}-{n:x}", std::process::id());
        let tmp = self.shared.queue.join(format!(".{stem}.tmp"));
        let dst = self.shared.queue.join(format!("{stem}.{QUEUE_EXT}"));
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        if self.options.sync_queue_files {
            f.sync_data()?;
        }
        drop(f);
        fs::rename(&tmp, &dst)?;
        Ok(())
    }
}

fn open_data(dir: &Path, writable: bool) -> Result<File, StoreError> {
    let path = dir.join(DATA_FILE);
    let mut f = OpenOptions::new()
        .read(true)
        .append(writable)
        .create(writable)
        .open(&path)?;
    let len = f.metadata()?.len();
    if len == 0 && writable {
        f.write_all(DATA_MAGIC)?;
        f.sync_data()?;
    } else {
        let mut magic = [0u8; 8];
        std::io::Read::read_exact(&mut f, &mut magic)
            .map_err(|_| StoreError::Corrupt(format!("{} is too short", path.display())))?;
        if &magic != DATA_MAGIC {
            return Err(StoreError::Corrupt(format!(
                "{} has a bad header",
                path.display()
            )));
        }
    }
    Ok(f)
}

fn clear_temp_files(queue: &Path) -> Result<(), StoreError> {
    for e in fs::read_dir(queue)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "tmp") {
            fs::remove_file(&p)?;
        }
    }
    Ok(())
}

impl Store for EmbeddedStore {
    fn get(&self, key: &CacheKey) -> Result<Option<CacheEntry>, StoreError> {
        if self.writer.is_none() {
            self.shared.refresh()?;
        }
        let id = (key.hash.clone(), key.payload_kind);
        let found = accept(self.shared.view.read().expect("view lock").get(&id)?, key);
        self.counters.lookup(found.is_some());
        Ok(found)
    }

    fn put_if_absent(&self, entry: CacheEntry) -> Result<PutOutcome, StoreError> {
        entry.validate()?;
        if self.writer.is_none() {
            self.shared.refresh()?;
        }
        let id = entry.id();
        let outcome = {
            let mut pending = self.shared.pending.lock().expect("pending lock");
            if pending.contains(&id) || self.shared.is_committed(&id) {
                PutOutcome::AlreadyPresent
            } else {
                self.enqueue(&record::encode(&entry), &entry.key.hash)?;
                pending.insert(id.clone());
                PutOutcome::Inserted
            }
        };
        self.counters.put(outcome);
        if outcome == PutOutcome::Inserted {
            if let Some(w) = &self.writer {
                let _ = w.lock().expect("writer lock").tx.send(Msg::Wake);
                // Waiting until readers can see the record keeps busy workers
                // from holding the writer off a CPU for a whole run, with
                // every lookup in between a needless miss.
                if !self.options.wait_for_commit {
                    std::thread::yield_now();
                } else if !self.shared.wait_committed(&id, COMMIT_WAIT) {
                    log::warn!("record {} not committed after {COMMIT_WAIT:?}", id.0);
                }
            }
        }
        Ok(outcome)
    }

    fn stats(&self) -> Result<CacheStats, StoreError> {
        Ok(self.counters.snapshot())
    }

    fn entries(&self) -> Result<Vec<CacheEntry>, StoreError> {
        if self.writer.is_none() {
            self.shared.refresh()?;
        }
        let view = self.shared.view.read().expect("view lock");
        let mut v = Vec::with_capacity(view.index.len());
        for &(off, len) in view.index.values() {
            v.push(record::decode(&view.bytes()[off..off + len])?.0);
        }
        sort_entries(&mut v);
        Ok(v)
    }

    /// With the writer: commits everything queued so far. Without it: waits
    /// until the owning process has committed this handle's records.
    fn flush(&self) -> Result<(), StoreError> {
        match &self.writer {
            Some(w) => {
                let (tx, rx) = mpsc::channel();
                w.lock()
                    .expect("writer lock")
                    .tx
                    .send(Msg::Drain(tx))
                    .map_err(|_| StoreError::WriterGone)?;
                rx.recv().map_err(|_| StoreError::WriterGone)??;
                Ok(())
            }
            None => loop {
                self.shared.refresh()?;
                {
                    let mut pending = self.shared.pending.lock().expect("pending lock");
                    pending.retain(|id| !self.shared.is_committed(id));
                    if pending.is_empty() {
                        return Ok(());
                    }
                }
                std::thread::sleep(self.options.poll_interval);
            },
        }
    }

    fn backend(&self) -> &'static str {
        "embedded"
    }
}

impl Drop for EmbeddedStore {
    fn drop(&mut self) {
        if let Some(w) = self.writer.take() {
            let mut w = w.into_inner().unwrap_or_else(|e| e.into_inner());
            let _ = w.tx.send(Msg::Stop);
            if let Some(t) = w.thread.take() {
                let _ = t.join();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Payload;

    fn compact(i: u64) -> CacheEntry {
        let key = CacheKey {
            hash: format!("{i:016x}"),
            n_qubits: 3,
            interior_spiders: 1,
            payload_kind: PayloadKind::Compact,
        };
        CacheEntry {
            created_at_ms: i as i64,
            ..CacheEntry::new(key, Payload::Compact(i as f64), "sv")
        }
    }

    #[test]
    fn visible_only_after_commit() {
        let dir = tempfile::tempdir().unwrap();
        let opts = EmbeddedOptions {
            poll_interval: Duration::from_secs(3600),
            ..EmbeddedOptions::default()
        };
        let w = EmbeddedStore::open_with(dir.path(), opts).unwrap();
        let r = EmbeddedStore::open_shared(dir.path()).unwrap();
        let e = compact(1);
        assert_eq!(r.put_if_absent(e.clone()).unwrap(), PutOutcome::Inserted);
        assert_eq!(r.get(&e.key).unwrap(), None);
        assert_eq!(w.get(&e.key).unwrap(), None);
        assert_eq!(
            r.put_if_absent(e.clone()).unwrap(),
            PutOutcome::AlreadyPresent
        );
        w.flush().unwrap();
        assert_eq!(w.get(&e.key).unwrap(), Some(e.clone()));
        assert_eq!(r.get(&e.key).unwrap(), Some(e));
    }

    #[test]
    fn in_process_puts_wait_for_their_commit() {
        let dir = tempfile::tempdir().unwrap();
        let opts = EmbeddedOptions {
            poll_interval: Duration::from_secs(3600),
            ..EmbeddedOptions::default()
        };
        let s = EmbeddedStore::open_with(dir.path(), opts).unwrap();
        for i in 0..20 {
            assert_eq!(s.put_if_absent(compact(i)).unwrap(), PutOutcome::Inserted);
            assert_eq!(s.pending(), 0);
            assert_eq!(s.get(&compact(i).key).unwrap(), Some(compact(i)));
        }
    }

    #[test]
    fn second_writer_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let _a = EmbeddedStore::open(dir.path()).unwrap();
        assert!(matches!(
            EmbeddedStore::open(dir.path()),
            Err(StoreError::Locked(_))
        ));
    }

    #[test]
    fn reopen_sees_committed_entries() {
        let dir = tempfile::tempdir().unwrap();
        {
            let s = EmbeddedStore::open(dir.path()).unwrap();
            for i in 0..10 {
                s.put_if_absent(compact(i)).unwrap();
            }
            s.flush().unwrap();
        }
        let s = EmbeddedStore::open(dir.path()).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.get(&compact(7).key).unwrap(), Some(compact(7)));
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        {
            let s = EmbeddedStore::open(dir.path()).unwrap();
            s.put_if_absent(compact(1)).unwrap();
            s.flush().unwrap();
        }
        let path = dir.path().join(DATA_FILE);
        let good = fs::metadata(&path).unwrap().len();
        let mut tail = record::encode(&compact(2));
        tail.truncate(20);
        OpenOptions::new()
            .append(true)
            .open(&path)
            .unwrap()
            .write_all(&tail)
            .unwrap();
        let s = EmbeddedStore::open(dir.path()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.data_len().unwrap(), good);
    }

    #[test]
    fn shared_handle_enqueues_for_the_writer() {
        let dir = tempfile::tempdir().unwrap();
        let w = EmbeddedStore::open(dir.path()).unwrap();
        let r = EmbeddedStore::open_shared(dir.path()).unwrap();
        assert!(!r.is_writer());
        assert_eq!(r.put_if_absent(compact(5)).unwrap(), PutOutcome::Inserted);
        r.flush().unwrap();
        assert!(r.get(&compact(5).key).unwrap().is_some());
        w.flush().unwrap();
        assert!(w.get(&compact(5).key).unwrap().is_some());
    }
}
