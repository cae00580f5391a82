//! Published snapshot generations.
//!
//! Layout under `<data_dir>/snapshots`:
//!
//! ```text
//! CURRENT                 name of the live generation, e.g. "gen-000004\n"
//! gen-000004/
//!   meta.json
//!   unigrams-YYYY-MM-DD.tsv, bigrams-YYYY-MM-DD.tsv, tokens-YYYY-MM-DD.txt
//!   weekly-unigrams-YYYY-MM-DD.tsv
//!   metrics.csv, report.html
//! ```
//!
//! A generation is written into a staging directory, renamed into place and
//! only then named in `CURRENT`, so readers never observe a partial one.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::export::{
    bigram_file_name, bigram_tsv, parse_bigram_tsv, parse_tokens_txt, parse_unigram_tsv,
    tokens_file_name, tokens_txt, unigram_file_name, unigram_tsv, ListParseError,
};
use super::{Corpus, DailyTable, TableError};
use crate::metrics::{ReportBundle, METRICS_FILE, REPORT_FILE};
use crate::query::{CorpusIndex, IndexBuilder};

pub const SNAPSHOT_DIR: &str = "snapshots";
pub const CURRENT_FILE: &str = "CURRENT";
pub const META_FILE: &str = "meta.json";
pub const KEEP_GENERATIONS: usize = 3;
const STAGING_PREFIX: &str = ".staging-";

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad metadata: {source}")]
    Meta {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    List {
        path: PathBuf,
        #[source]
        source: ListParseError,
    },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
    #[error("no snapshot has been published")]
    NoSnapshot,
    #[error("cannot publish an empty corpus")]
    EmptyCorpus,
    #[error("publish aborted: {0}")]
    Aborted(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Corpus-level facts about one published generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub generation: u64,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub last_update_instant: DateTime<Utc>,
    pub token_total: u64,
    pub type_total: u64,
    pub source_count: usize,
}

pub fn generation_name(generation: u64) -> String {
    format!("gen-{generation:06}")
}

fn parse_generation(name: &str) -> Option<u64> {
    name.strip_prefix("gen-")?.parse().ok()
}

#[derive(Debug, Clone)]
pub struct SnapshotStore {
    root: PathBuf,
}

impl SnapshotStore {
    pub fn new(data_dir: &Path) -> Self {
        Self {
            root: data_dir.join(SNAPSHOT_DIR),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn generation_dir(&self, generation: u64) -> PathBuf {
        self.root.join(generation_name(generation))
    }

    /// The live generation, if any.
    pub fn current(&self) -> Result<Option<u64>, SnapshotError> {
        let path = self.root.join(CURRENT_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&path)(e)),
        };
        parse_generation(text.trim())
            .map(Some)
            .ok_or_else(|| SnapshotError::Corrupt(format!("{}: {text:?}", path.display())))
    }

    pub fn current_dir(&self) -> Result<PathBuf, SnapshotError> {
        let generation = self.current()?.ok_or(SnapshotError::NoSnapshot)?;
        Ok(self.generation_dir(generation))
    }

    /// Generation numbers present on disk, ascending.
    pub fn generations(&self) -> Result<Vec<u64>, SnapshotError> {
        let entries = match fs::read_dir(&self.root) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(&self.root)(e)),
        };
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry.map_err(io_err(&self.root))?;
            if let Some(g) = entry.file_name().to_str().and_then(parse_generation) {
                out.push(g);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    fn clear_staging(&self) -> Result<(), SnapshotError> {
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            if entry.file_name().to_string_lossy().starts_with(STAGING_PREFIX) {
                let path = entry.path();
                fs::remove_dir_all(&path).map_err(io_err(&path))?;
            }
        }
        Ok(())
    }

    /// Writes a new generation from `corpus` and `report` and makes it
    /// current. `on_file` runs after every file written to staging; an error
    /// from it abandons the publish and leaves the previous generation live.
    pub fn publish(
        &self,
        corpus: &Corpus,
        report: &ReportBundle,
        published_at: DateTime<Utc>,
        on_file: &mut dyn FnMut(&Path) -> Result<(), SnapshotError>,
    ) -> Result<CorpusMeta, SnapshotError> {
        let (Some(first_date), Some(last_date)) = (corpus.first_date(), corpus.last_date()) else {
            return Err(SnapshotError::EmptyCorpus);
        };
        fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        self.clear_staging()?;
        let last = self.generations()?.last().copied();
        let generation = last.max(self.current()?).map_or(1, |g| g + 1);
        let name = generation_name(generation);
        let staging = self.root.join(format!("{STAGING_PREFIX}{name}"));
        fs::create_dir_all(&staging).map_err(io_err(&staging))?;

        let mut write = |file: &str, body: &[u8]| -> Result<(), SnapshotError> {
            let path = staging.join(file);
            write_synced(&path, body)?;
            on_file(&path)
        };
        for t in corpus.tables() {
            write(&unigram_file_name(t.date()), unigram_tsv(t.unigrams()).as_bytes())?;
            write(&bigram_file_name(t.date()), bigram_tsv(t.bigrams()).as_bytes())?;
            write(&tokens_file_name(t.date()), tokens_txt(t.token_order()).as_bytes())?;
        }
        for list in &report.weekly_lists {
            write(&list.file_name, list.body.as_bytes())?;
        }
        write(METRICS_FILE, report.metrics_csv.as_bytes())?;
        write(REPORT_FILE, report.html.as_bytes())?;
        let meta = CorpusMeta {
            generation,
            first_date,
            last_date,
            last_update_instant: published_at,
            token_total: corpus.token_total(),
            type_total: corpus.type_total() as u64,
            source_count: corpus.sources().len(),
        };
        let json = serde_json::to_vec_pretty(&meta).map_err(|source| SnapshotError::Meta {
            path: staging.join(META_FILE),
            source,
        })?;
        write(META_FILE, &json)?;

        let target = self.root.join(&name);
        fs::rename(&staging, &target).map_err(io_err(&target))?;
        let tmp = self.root.join(format!("{CURRENT_FILE}.tmp"));
        write_synced(&tmp, format!("{name}\n").as_bytes())?;
        let current = self.root.join(CURRENT_FILE);
        fs::rename(&tmp, &current).map_err(io_err(&current))?;
        sync_dir(&self.root)?;
        tracing::info!(generation, %first_date, %last_date, "published snapshot");
        self.prune(KEEP_GENERATIONS)?;
        Ok(meta)
    }

    /// Deletes all but the newest `keep` generations. The current one is
    /// always kept.
    pub fn prune(&self, keep: usize) -> Result<(), SnapshotError> {
        let current = self.current()?;
        let generations = self.generations()?;
        let cut = generations.len().saturating_sub(keep);
        for g in &generations[..cut] {
            if Some(*g) == current {
                continue;
            }
            let dir = self.generation_dir(*g);
            fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(())
    }
}

fn write_synced(path: &Path, body: &[u8]) -> Result<(), SnapshotError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(body).map_err(io_err(path))?;
    f.sync_all().map_err(io_err(path))
}

fn sync_dir(dir: &Path) -> Result<(), SnapshotError> {
    fs::File::open(dir)
        .and_then(|f| f.sync_all())
        .map_err(io_err(dir))
}

pub fn read_meta(dir: &Path) -> Result<CorpusMeta, SnapshotError> {
    let path = dir.join(META_FILE);
    let text = fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&text).map_err(|source| SnapshotError::Meta { path, source })
}

fn days(meta: &CorpusMeta) -> impl Iterator<Item = NaiveDate> {
    let span = (meta.last_date - meta.first_date).num_days();
    let first = meta.first_date;
    (0..=span).map(move |i| first + Duration::days(i))
}

fn read_list<T>(
    dir: &Path,
    file: &str,
    parse: impl FnOnce(&str) -> Result<T, ListParseError>,
) -> Result<T, SnapshotError> {
    let path = dir.join(file);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    parse(&text).map_err(|source| SnapshotError::List { path, source })
}

fn read_day(
    dir: &Path,
    date: NaiveDate,
) -> Result<(HashMap<String, u64>, HashMap<(String, String), u64>), SnapshotError> {
    let uni = read_list(dir, &unigram_file_name(date), parse_unigram_tsv)?;
    let bi = read_list(dir, &bigram_file_name(date), parse_bigram_tsv)?;
    Ok((uni, bi))
}

/// Loads the query index of a generation directory.
pub fn load_index(dir: &Path) -> Result<(CorpusMeta, CorpusIndex), SnapshotError> {
    let meta = read_meta(dir)?;
    let mut builder = IndexBuilder::new();
    for date in days(&meta) {
        let (uni, bi) = read_day(dir, date)?;
        builder.add_day(
            date,
            uni.iter().map(|(f, c)| (f.as_str(), *c)),
            bi.iter().map(|((a, b), c)| ((a.as_str(), b.as_str()), *c)),
        );
    }
    let index = builder.finish();
    if index.token_total() != meta.token_total {
        return Err(SnapshotError::Corrupt(format!(
            "{}: token total {} does not match metadata {}",
            dir.display(),
            index.token_total(),
            meta.token_total
        )));
    }
    Ok((meta, index))
}

/// Loads full daily tables, token streams included.
pub fn load_corpus(dir: &Path) -> Result<(CorpusMeta, Corpus), SnapshotError> {
    let meta = read_meta(dir)?;
    let mut tables = Vec::new();
    for date in days(&meta) {
        let (uni, bi) = read_day(dir, date)?;
        let tokens = read_list(dir, &tokens_file_name(date), |t| Ok(parse_tokens_txt(t)))?;
        tables.push(DailyTable::from_counts(date, uni, bi, tokens)?);
    }
    Ok((meta, Corpus::from_tables(tables)))
}
