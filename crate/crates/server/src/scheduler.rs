use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Datelike, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use feedgram_core::ingest::{HarvestError, Harvester, LockError, SourceConfig};
use feedgram_core::normalize::ExclusionList;
use feedgram_core::pipeline::{rebuild, BuildOptions};

use crate::snapshot::SnapshotHandle;

pub const DEFAULT_HARVEST_INTERVAL: Duration = Duration::from_secs(3 * 60 * 60);

/// A fixed local weekday and time, e.g. Monday 03:00 Europe/Berlin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeeklySchedule {
    pub weekday: Weekday,
    pub time: NaiveTime,
    pub zone: Tz,
}

impl WeeklySchedule {
    /// First scheduled instant strictly after `now`. A local time skipped by
    /// a DST change runs an hour later.
    pub fn next_after(&self, now: DateTime<Utc>) -> DateTime<Utc> {
        let local = now.with_timezone(&self.zone).date_naive();
        let ahead = (7 + self.weekday.num_days_from_monday() as i64
            - local.weekday().num_days_from_monday() as i64)
            % 7;
        let mut date = local + chrono::Duration::days(ahead);
        loop {
            let naive = date.and_time(self.time);
            let at = self
                .zone
                .from_local_datetime(&naive)
                .earliest()
                .or_else(|| self.zone.from_local_datetime(&(naive + chrono::Duration::hours(1))).earliest())
                .map(|t| t.with_timezone(&Utc));
            if let Some(at) = at.filter(|t| *t > now) {
                return at;
            }
            date += chrono::Duration::days(7);
        }
    }
}

/// Everything the background jobs need.
#[derive(Debug, Clone)]
pub struct Jobs {
    pub data_dir: PathBuf,
    pub sources: Option<SourceConfig>,
    pub exclusions: Arc<ExclusionList>,
    pub zone: Tz,
    pub fetch_timeout: Duration,
    pub harvest_interval: Option<Duration>,
    pub rebuild: Option<WeeklySchedule>,
    pub build: BuildOptions,
}

impl Jobs {
    /// Rebuilds from the archive, publishes and swaps the served snapshot.
    /// On failure the previous snapshot stays live.
    pub async fn rebuild_now(&self, snapshots: &SnapshotHandle) -> Result<u64, String> {
        let data_dir = self.data_dir.clone();
        let exclusions = self.exclusions.clone();
        let build = self.build;
        let meta = tokio::task::spawn_blocking(move || {
            rebuild(&data_dir, &exclusions, build, Utc::now(), &mut |_| Ok(()))
        })
        .await
        .map_err(|e| e.to_string())?
        .map_err(|e| e.to_string())?;
        let store = snapshots.store().clone();
        let generation = meta.generation;
        let published = tokio::task::spawn_blocking(move || {
            crate::snapshot::Published::load(&store, generation)
        })
        .await
        .map_err(|e| e.to_string())?
        .map_err(|e| e.to_string())?;
        snapshots.swap(published);
        Ok(generation)
    }

    /// Starts the configured jobs on the current runtime.
    pub fn spawn(self, snapshots: Arc<SnapshotHandle>) -> Vec<tokio::task::JoinHandle<()>> {
        let mut handles = Vec::new();
        if let (Some(every), Some(sources)) = (self.harvest_interval, self.sources.clone()) {
            let jobs = self.clone();
            handles.push(tokio::spawn(async move {
                jobs.harvest_loop(sources, every).await;
            }));
        }
        if let Some(schedule) = self.rebuild {
            let jobs = self.clone();
            handles.push(tokio::spawn(async move {
                loop {
                    let next = schedule.next_after(Utc::now());
                    tracing::info!(%next, "next rebuild");
                    let wait = (next - Utc::now()).to_std().unwrap_or_default();
                    tokio::time::sleep(wait).await;
                    match jobs.rebuild_now(&snapshots).await {
                        Ok(generation) => tracing::info!(generation, "weekly rebuild done"),
                        Err(e) => tracing::error!(error = %e, "weekly rebuild failed; keeping previous snapshot"),
                    }
                }
            }));
        }
        handles
    }

    async fn harvest_loop(&self, sources: SourceConfig, every: Duration) {
        let mut harvester =
            match Harvester::new(&self.data_dir, sources.sources, self.zone, self.fetch_timeout) {
                Ok(h) => h,
                Err(e) => {
                    tracing::error!(error = %e, "cannot start harvesting");
                    return;
                }
            };
        let mut ticker = tokio::time::interval(every);
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        loop {
            ticker.tick().await;
            match harvester.run_cycle(Utc::now()).await {
                Ok(report) => tracing::info!(
                    accepted = report.accepted(),
                    failed = report.failures(),
                    "harvest cycle done"
                ),
                Err(HarvestError::Lock(LockError::Busy(_))) => {
                    tracing::warn!("another cycle is running; skipping this one")
                }
                Err(e) => tracing::error!(error = %e, "harvest cycle failed"),
            }
        }
    }
}
