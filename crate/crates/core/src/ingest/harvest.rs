use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use chrono_tz::Tz;
use futures::future::join_all;

use super::archive::{Archive, ArchiveError, ArchiveRecord};
use super::dedup::{dedupe, KeyStore};
use super::fetch::{FetchError, Fetcher};
use super::lock::{CycleLock, LockError};
use super::sources::FeedSource;
use super::timestamp::day_of_item;

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error(transparent)]
    Lock(#[from] LockError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Fetcher(#[from] FetchError),
}

/// Result of harvesting one source in one cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceOutcome {
    pub source_id: String,
    pub fetched: usize,
    pub accepted: usize,
    pub duplicates: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleReport {
    pub outcomes: Vec<SourceOutcome>,
}

impl CycleReport {
    pub fn accepted(&self) -> usize {
        self.outcomes.iter().map(|o| o.accepted).sum()
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.error.is_some()).count()
    }

    pub fn all_failed(&self) -> bool {
        !self.outcomes.is_empty() && self.failures() == self.outcomes.len()
    }
}

/// Runs harvest cycles over a fixed source list into one data directory.
pub struct Harvester {
    data_dir: PathBuf,
    sources: Vec<FeedSource>,
    fetcher: Fetcher,
    archive: Archive,
    zone: Tz,
    seen: KeyStore,
    // Archive size the key store corresponds to; None forces a reload.
    synced_len: Option<u64>,
}

impl Harvester {
    pub const ARCHIVE_PATH: &'static str = "archive/raw.tsv";

    pub fn archive_path(data_dir: &Path) -> PathBuf {
        data_dir.join(Self::ARCHIVE_PATH)
    }

    pub fn new(
        data_dir: &Path,
        sources: Vec<FeedSource>,
        zone: Tz,
        timeout: Duration,
    ) -> Result<Self, HarvestError> {
        // Opened under the cycle lock on the first cycle.
        let archive = Archive::unopened(Self::archive_path(data_dir));
        Ok(Self {
            data_dir: data_dir.to_path_buf(),
            sources,
            fetcher: Fetcher::new(timeout)?,
            archive,
            zone,
            seen: KeyStore::new(),
            synced_len: None,
        })
    }

    fn archive_len(&self) -> Result<u64, ArchiveError> {
        std::fs::metadata(self.archive.path())
            .map(|m| m.len())
            .map_err(|source| ArchiveError::Io {
                path: self.archive.path().display().to_string(),
                source,
            })
    }

    // Another process may have appended since our last cycle.
    fn sync_keys(&mut self) -> Result<(), ArchiveError> {
        let len = self.archive_len().ok();
        if self.synced_len.is_none() || self.synced_len != len {
            self.archive = Archive::open(self.archive.path().to_path_buf())?;
            let records = self.archive.read_all()?;
            self.seen = KeyStore::from_records(&records);
            self.synced_len = Some(self.archive_len()?);
        }
        Ok(())
    }

    /// One harvest cycle: fetch every source concurrently, then dedupe and
    /// archive the results one source at a time in configuration order.
    /// A failing source is logged and skipped; it never aborts the cycle.
    pub async fn run_cycle(&mut self, now: DateTime<Utc>) -> Result<CycleReport, HarvestError> {
        let _lock = CycleLock::try_acquire(&self.data_dir)?;
        self.sync_keys()?;

        let fetcher = &self.fetcher;
        let fetches = join_all(self.sources.iter().map(|s| fetcher.fetch_feed(s, now))).await;

        let mut report = CycleReport::default();
        for (source, result) in self.sources.iter().zip(fetches) {
            let items = match result {
                Ok(items) => items,
                Err(e) => {
                    tracing::error!(source = %source.id, error = %e, "skipping source this cycle");
                    report.outcomes.push(SourceOutcome {
                        source_id: source.id.clone(),
                        fetched: 0,
                        accepted: 0,
                        duplicates: 0,
                        error: Some(e.to_string()),
                    });
                    continue;
                }
            };
            let fetched = items.len();
            let fresh = dedupe(items, &mut self.seen);
            let records: Vec<ArchiveRecord> = fresh
                .into_iter()
                .map(|item| ArchiveRecord {
                    date: day_of_item(&item.published_raw, self.zone, item.fetched_at),
                    source_id: item.source_id,
                    title: item.title,
                    description: item.description,
                    link: item.link,
                    fetched_at: item.fetched_at,
                })
                .collect();
            if let Err(e) = self.archive.append(&records) {
                self.synced_len = None;
                return Err(e.into());
            }
            tracing::info!(source = %source.id, fetched, accepted = records.len(), "harvested");
            report.outcomes.push(SourceOutcome {
                source_id: source.id.clone(),
                fetched,
                accepted: records.len(),
                duplicates: fetched - records.len(),
                error: None,
            });
        }
        self.synced_len = Some(self.archive_len()?);
        Ok(report)
    }
}
