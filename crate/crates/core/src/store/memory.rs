use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::RwLock;

use crate::identity::{CacheKey, PayloadKind};

use super::{
    accept, sort_entries, CacheEntry, CacheStats, Counters, PutOutcome, Store, StoreError,
};

/// Process-local store. Also the table behind the networked server.
#[derive(Debug, Default)]
pub struct MemoryStore {
    map: RwLock<HashMap<(String, PayloadKind), CacheEntry>>,
    counters: Counters,
}

impl MemoryStore {
    pub fn new() -> MemoryStore {
        MemoryStore::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Store for MemoryStore {
    fn get(&self, key: &CacheKey) -> Result<Option<CacheEntry>, StoreError> {
        let found = self
            .map
            .read()
            .expect("store lock")
            .get(&(key.hash.clone(), key.payload_kind))
            .cloned();
        let found = accept(found, key);
        self.counters.lookup(found.is_some());
        Ok(found)
    }

    fn put_if_absent(&self, entry: CacheEntry) -> Result<PutOutcome, StoreError> {
        entry.validate()?;
        let outcome = {
            let mut map = self.map.write().expect("store lock");
            match map.entry(entry.id()) {
                Entry::Occupied(_) => PutOutcome::AlreadyPresent,
                Entry::Vacant(slot) => {
                    slot.insert(entry);
                    PutOutcome::Inserted
                }
            }
        };
        self.counters.put(outcome);
        Ok(outcome)
    }

    fn stats(&self) -> Result<CacheStats, StoreError> {
        Ok(self.counters.snapshot())
    }

    fn entries(&self) -> Result<Vec<CacheEntry>, StoreError> {
        let mut v: Vec<CacheEntry> = self
            .map
            .read()
            .expect("store lock")
            .values()
            .cloned()
            .collect();
        sort_entries(&mut v);
        Ok(v)
    }

    fn backend(&self) -> &'static str {
        "memory"
    }
}
