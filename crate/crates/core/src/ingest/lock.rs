use std::fs::{File, OpenOptions, TryLockError};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum LockError {
    #[error("another harvest or rebuild holds {0}")]
    Busy(PathBuf),
    #[error("lock file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Exclusive advisory lock on the data directory. Harvest cycles and
/// rebuilds hold it for their whole duration; the OS releases it if the
/// process dies.
#[derive(Debug)]
pub struct CycleLock {
    _file: File,
    path: PathBuf,
}

impl CycleLock {
    pub const FILE_NAME: &'static str = "cycle.lock";

    pub fn try_acquire(data_dir: &Path) -> Result<Self, LockError> {
        let path = data_dir.join(Self::FILE_NAME);
        let io = |source| LockError::Io {
            path: path.clone(),
            source,
        };
        std::fs::create_dir_all(data_dir).map_err(io)?;
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io)?;
        match file.try_lock() {
            Ok(()) => Ok(Self { _file: file, path }),
            Err(TryLockError::WouldBlock) => Err(LockError::Busy(path)),
            Err(TryLockError::Error(source)) => Err(LockError::Io { path, source }),
        }
    }

    /// Blocks until the lock is free.
    pub fn acquire(data_dir: &Path) -> Result<Self, LockError> {
        let path = data_dir.join(Self::FILE_NAME);
        let io = |source| LockError::Io {
            path: path.clone(),
            source,
        };
        std::fs::create_dir_all(data_dir).map_err(io)?;
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io)?;
        file.lock().map_err(io)?;
        Ok(Self { _file: file, path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_holder_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let first = CycleLock::try_acquire(dir.path()).unwrap();
        assert!(matches!(CycleLock::try_acquire(dir.path()), Err(LockError::Busy(_))));
        drop(first);
        assert!(CycleLock::try_acquire(dir.path()).is_ok());
    }
}
