//! Cache-through execution: key a circuit, look it up, compute on a miss and
//! offer the result back to the store.

use std::ops::AddAssign;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::circuit::Circuit;
use crate::identity::{circuit_key_timed, CacheKey, PayloadKind, DEFAULT_WL_ITERATIONS};
use crate::sim::{simulate, SimError, Statevector};
use crate::store::{CacheEntry, Payload, PutOutcome, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cached payload for {0} does not decode")]
    BadPayload(String),
}

/// What to do when the store fails mid-run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OnStoreError {
    Abort,
    /// Log, count in [`Accounting::store_errors`], and compute without the
    /// cache.
    Degrade,
}

/// Summed wall time per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub translate: Duration,
    pub reduce: Duration,
    pub serialize: Duration,
    pub hash: Duration,
    pub lookup: Duration,
    pub simulate: Duration,
    pub store: Duration,
}

impl StageTimings {
    pub const NAMES: [&'static str; 7] = [
        "translate",
        "reduce",
        "serialize",
        "hash",
        "lookup",
        "simulate",
        "store",
    ];

    pub fn as_array(&self) -> [Duration; 7] {
        [
            self.translate,
            self.reduce,
            self.serialize,
            self.hash,
            self.lookup,
            self.simulate,
            self.store,
        ]
    }

    /// Everything except simulation.
    pub fn overhead(&self) -> Duration {
        self.translate + self.reduce + self.serialize + self.hash + self.lookup
    }

    /// Mean identification overhead per request over mean simulation time
    /// per simulation. `None` until both have been observed.
    pub fn overhead_ratio(&self, a: &Accounting) -> Option<f64> {
        if a.requests == 0 || a.simulations == 0 || self.simulate.is_zero() {
            return None;
        }
        let per_request = self.overhead().as_secs_f64() / a.requests as f64;
        let per_simulation = self.simulate.as_secs_f64() / a.simulations as f64;
        Some(per_request / per_simulation)
    }
}

impl AddAssign for StageTimings {
    fn add_assign(&mut self, o: StageTimings) {
        self.translate += o.translate;
        self.reduce += o.reduce;
        self.serialize += o.serialize;
        self.hash += o.hash;
        self.lookup += o.lookup;
        self.simulate += o.simulate;
        self.store += o.store;
    }
}

/// Per-executor request accounting. On a cached run without store errors,
/// `hits + inserted + extra == requests`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Accounting {
    pub requests: u64,
    pub hits: u64,
    pub misses: u64,
    pub simulations: u64,
    pub inserted: u64,
    pub extra: u64,
    pub store_errors: u64,
}

impl Accounting {
    pub fn hit_rate(&self) -> f64 {
        if self.requests == 0 {
            0.0
        } else {
            self.hits as f64 / self.requests as f64
        }
    }
}

#[derive(Default)]
struct Counters {
    requests: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
    simulations: AtomicU64,
    inserted: AtomicU64,
    extra: AtomicU64,
    store_errors: AtomicU64,
}

fn bump(c: &AtomicU64) {
    c.fetch_add(1, Ordering::Relaxed);
}

/// How a request was served.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Served {
    Hit,
    Computed,
}

pub struct Executor {
    store: Option<Arc<dyn Store>>,
    wl_iterations: u32,
    tag: String,
    on_error: OnStoreError,
    counters: Counters,
    timings: Mutex<StageTimings>,
}

impl Executor {
    /// Computes every request; no keys are derived.
    pub fn uncached() -> Executor {
        Executor::build(None)
    }

    pub fn cached(store: Arc<dyn Store>) -> Executor {
        Executor::build(Some(store))
    }

    fn build(store: Option<Arc<dyn Store>>) -> Executor {
        Executor {
            store,
            wl_iterations: DEFAULT_WL_ITERATIONS,
            tag: "statevector".into(),
            on_error: OnStoreError::Abort,
            counters: Counters::default(),
            timings: Mutex::new(StageTimings::default()),
        }
    }

    pub fn with_wl_iterations(mut self, n: u32) -> Executor {
        self.wl_iterations = n;
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Executor {
        self.tag = tag.into();
        self
    }

    pub fn on_store_error(mut self, policy: OnStoreError) -> Executor {
        self.on_error = policy;
        self
    }

    pub fn store(&self) -> Option<&Arc<dyn Store>> {
        self.store.as_ref()
    }

    pub fn wl_iterations(&self) -> u32 {
        self.wl_iterations
    }

    pub fn accounting(&self) -> Accounting {
        let c = &self.counters;
        let r = |a: &AtomicU64| a.load(Ordering::Relaxed);
        Accounting {
            requests: r(&c.requests),
            hits: r(&c.hits),
            misses: r(&c.misses),
            simulations: r(&c.simulations),
            inserted: r(&c.inserted),
            extra: r(&c.extra),
            store_errors: r(&c.store_errors),
        }
    }

    pub fn timings(&self) -> StageTimings {
        *self.timings.lock().expect("timings lock")
    }

    fn add_timings(&self, t: StageTimings) {
        *self.timings.lock().expect("timings lock") += t;
    }

    fn store_failed(&self, e: StoreError) -> Result<(), ExecError> {
        match self.on_error {
            OnStoreError::Abort => Err(e.into()),
            OnStoreError::Degrade => {
                log::warn!("store failure, computing without the cache: {e}");
                bump(&self.counters.store_errors);
                Ok(())
            }
        }
    }

    /// Payload of kind `kind` for `c`, from the store when possible,
    /// otherwise from `compute`.
    pub fn fetch(
        &self,
        c: &Circuit,
        kind: PayloadKind,
        compute: impl FnOnce(&Circuit) -> Result<Payload, SimError>,
    ) -> Result<(Payload, Served), ExecError> {
        bump(&self.counters.requests);
        let mut t = StageTimings::default();
        let Some(store) = &self.store else {
            bump(&self.counters.misses);
            let t0 = Instant::now();
            let p = compute(c)?;
            t.simulate = t0.elapsed();
            bump(&self.counters.simulations);
            self.add_timings(t);
            return Ok((p, Served::Computed));
        };

        let (key, kt) = circuit_key_timed(c, self.wl_iterations);
        let key: CacheKey = key.with_payload_kind(kind);
        t.translate = kt.translate;
        t.reduce = kt.reduce;
        t.serialize = kt.serialize;
        t.hash = kt.hash;

        let t0 = Instant::now();
        let found = store.get(&key);
        t.lookup = t0.elapsed();
        let mut use_store = true;
        match found {
            Ok(Some(e)) => {
                bump(&self.counters.hits);
                self.add_timings(t);
                return Ok((e.payload, Served::Hit));
            }
            Ok(None) => {}
            Err(e) => {
                self.store_failed(e)?;
                use_store = false;
            }
        }
        bump(&self.counters.misses);

        let t0 = Instant::now();
        let payload = compute(c)?;
        t.simulate = t0.elapsed();
        bump(&self.counters.simulations);

        if use_store {
            let t0 = Instant::now();
            let entry = CacheEntry::new(key, payload.clone(), self.tag.as_str());
            match store.put_if_absent(entry) {
                Ok(PutOutcome::Inserted) => bump(&self.counters.inserted),
                Ok(PutOutcome::AlreadyPresent) => bump(&self.counters.extra),
                Err(e) => self.store_failed(e)?,
            }
            t.store = t0.elapsed();
        }
        self.add_timings(t);
        Ok((payload, Served::Computed))
    }

    /// Final statevector of `c` (a `Full` payload).
    pub fn statevector(&self, c: &Circuit) -> Result<(Statevector, Served), ExecError> {
        let (p, served) = self.fetch(c, PayloadKind::Full, |c| {
            Ok(Payload::Full(simulate(c)?.to_bytes()))
        })?;
        match p {
            Payload::Full(bytes) => Ok((
                Statevector::from_bytes(&bytes)
                    .map_err(|_| ExecError::BadPayload(c.label().unwrap_or("circuit").into()))?,
                served,
            )),
            Payload::Compact(_) => {
                Err(ExecError::BadPayload(c.label().unwrap_or("circuit").into()))
            }
        }
    }

    /// A single expectation value for `c` (a `Compact` payload).
    pub fn expectation(
        &self,
        c: &Circuit,
        compute: impl FnOnce(&Circuit) -> Result<f64, SimError>,
    ) -> Result<(f64, Served), ExecError> {
        let (p, served) = self.fetch(c, PayloadKind::Compact, |c| {
            Ok(Payload::Compact(compute(c)?))
        })?;
        match p {
            Payload::Compact(x) => Ok((x, served)),
            Payload::Full(_) => Err(ExecError::BadPayload(c.label().unwrap_or("circuit").into())),
        }
    }

    /// Flushes the store, if any.
    pub fn flush(&self) -> Result<(), ExecError> {
        if let Some(s) = &self.store {
            s.flush()?;
        }
        Ok(())
    }
}
