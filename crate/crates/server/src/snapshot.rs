use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use feedgram_core::query::CorpusIndex;
use feedgram_core::store::{load_index, CorpusMeta, SnapshotError, SnapshotStore};

/// One loaded generation. Requests hold an `Arc` to it for their whole
/// lifetime, so a swap never changes data under a running query.
#[derive(Debug)]
pub struct Published {
    pub meta: CorpusMeta,
    pub index: CorpusIndex,
    pub dir: PathBuf,
}

impl Published {
    pub fn generation(&self) -> u64 {
        self.meta.generation
    }

    pub fn load(store: &SnapshotStore, generation: u64) -> Result<Self, SnapshotError> {
        let dir = store.generation_dir(generation);
        let (meta, index) = load_index(&dir)?;
        if meta.generation != generation {
            return Err(SnapshotError::Corrupt(format!(
                "{} holds generation {}",
                dir.display(),
                meta.generation
            )));
        }
        Ok(Self { meta, index, dir })
    }
}

/// The generation currently served.
#[derive(Debug)]
pub struct SnapshotHandle {
    store: SnapshotStore,
    live: RwLock<Option<Arc<Published>>>,
}

impl SnapshotHandle {
    pub fn new(data_dir: &Path) -> Self {
        Self {
            store: SnapshotStore::new(data_dir),
            live: RwLock::new(None),
        }
    }

    pub fn store(&self) -> &SnapshotStore {
        &self.store
    }

    pub fn current(&self) -> Option<Arc<Published>> {
        self.live.read().expect("snapshot lock poisoned").clone()
    }

    pub fn swap(&self, next: Published) {
        let generation = next.generation();
        *self.live.write().expect("snapshot lock poisoned") = Some(Arc::new(next));
        tracing::info!(generation, "serving snapshot");
    }

    /// Loads the generation named on disk if it differs from the one being
    /// served. Returns the generation served afterwards.
    pub fn refresh(&self) -> Result<Option<u64>, SnapshotError> {
        let Some(on_disk) = self.store.current()? else {
            return Ok(self.current().map(|p| p.generation()));
        };
        if self.current().map(|p| p.generation()) == Some(on_disk) {
            return Ok(Some(on_disk));
        }
        self.swap(Published::load(&self.store, on_disk)?);
        Ok(Some(on_disk))
    }
}
