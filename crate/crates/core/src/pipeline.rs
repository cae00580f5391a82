//! Archive to published snapshot.

use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};

use crate::ingest::{Archive, ArchiveError, CycleLock, Harvester, LockError};
use crate::metrics::{generate_report, ReportError, ReportOptions};
use crate::normalize::ExclusionList;
use crate::store::snapshot::{CorpusMeta, SnapshotError, SnapshotStore};
use crate::store::Corpus;

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("no raw archive at {0}; run a harvest first")]
    NoArchive(String),
    #[error("raw archive is empty")]
    EmptyArchive,
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Lock(#[from] LockError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub report: ReportOptions,
}

/// Normalizes and counts every archived item. The caller must hold the
/// cycle lock.
pub fn corpus_from_archive(data_dir: &Path, exclusions: &ExclusionList) -> Result<Corpus, BuildError> {
    let path = Harvester::archive_path(data_dir);
    if !path.exists() {
        return Err(BuildError::NoArchive(path.display().to_string()));
    }
    let records = Archive::open(&path)?.read_all()?;
    if records.is_empty() {
        return Err(BuildError::EmptyArchive);
    }
    Ok(Corpus::from_records(&records, exclusions))
}

/// Rebuilds every table from the archive, recomputes the report and
/// publishes a new snapshot generation. Waits for any running harvest.
pub fn rebuild(
    data_dir: &Path,
    exclusions: &ExclusionList,
    options: BuildOptions,
    published_at: DateTime<Utc>,
    on_file: &mut dyn FnMut(&Path) -> Result<(), SnapshotError>,
) -> Result<CorpusMeta, BuildError> {
    let _lock = CycleLock::acquire(data_dir)?;
    let corpus = corpus_from_archive(data_dir, exclusions)?;
    let as_of: NaiveDate = corpus.last_date().ok_or(BuildError::EmptyArchive)?;
    let report = generate_report(&corpus, as_of, options.report)?;
    let meta = SnapshotStore::new(data_dir).publish(&corpus, &report, published_at, on_file)?;
    Ok(meta)
}
