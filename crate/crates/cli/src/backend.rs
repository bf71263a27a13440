use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use qcache::store::{EmbeddedStore, NetworkedStore, Store, StoreError};

pub const DEFAULT_DIR: &str = ".qcache";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Embedded,
    Networked,
}

/// Where the store lives, from flags first and then the environment.
#[derive(Clone, Debug, clap::Args)]
pub struct StoreArgs {
    /// Store backend. Defaults to networked when QCACHE_ADDR is set,
    /// embedded otherwise.
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Embedded store directory.
    #[arg(long, env = "QCACHE_DIR")]
    pub dir: Option<PathBuf>,
    /// Networked store address (host:port).
    #[arg(long, env = "QCACHE_ADDR")]
    pub addr: Option<String>,
}

impl StoreArgs {
    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or(if self.addr.is_some() {
            Backend::Networked
        } else {
            Backend::Embedded
        })
    }

    /// Opens the store. Embedded stores take the writer role when it is free
    /// and otherwise hand their writes to the process that holds it.
    pub fn open(&self) -> Result<Arc<dyn Store>> {
        match self.backend() {
            Backend::Embedded => {
                let dir = self.dir();
                let store = match EmbeddedStore::open(&dir) {
                    Err(StoreError::Locked(_)) => {
                        log::info!(
                            "{} has a writer already; queueing writes for it",
                            dir.display()
                        );
                        EmbeddedStore::open_shared(&dir)
                    }
                    other => other,
                }
                .with_context(|| format!("opening embedded store {}", dir.display()))?;
                Ok(Arc::new(store))
            }
            Backend::Networked => {
                let Some(addr) = &self.addr else {
                    bail!("the networked backend needs --addr or QCACHE_ADDR");
                };
                let store = NetworkedStore::connect(addr.clone())?;
                store.ping().with_context(|| format!("reaching {addr}"))?;
                Ok(Arc::new(store))
            }
        }
    }

    /// Read-only access where possible: an embedded store that has a data
    /// file is opened without taking the writer lock.
    pub fn open_reader(&self) -> Result<Arc<dyn Store>> {
        if self.backend() == Backend::Embedded {
            if let Ok(store) = EmbeddedStore::open_shared(self.dir()) {
                return Ok(Arc::new(store));
            }
        }
        self.open()
    }

    fn dir(&self) -> PathBuf {
        self.dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
    }
}
