use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("archive {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("archive line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// One accepted feed item as stored in the raw archive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveRecord {
    pub source_id: String,
    pub date: NaiveDate,
    pub title: String,
    pub description: String,
    pub link: String,
    pub fetched_at: DateTime<Utc>,
}

/// Tabs and line breaks become single spaces so a record fits on one line.
pub(crate) fn sanitize_field(text: &str) -> std::borrow::Cow<'_, str> {
    if text.contains(['\t', '\n', '\r']) {
        text.replace(['\t', '\n', '\r'], " ").into()
    } else {
        text.into()
    }
}

impl ArchiveRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            sanitize_field(&self.source_id),
            self.date,
            sanitize_field(&self.title),
            sanitize_field(&self.description),
            sanitize_field(&self.link),
            self.fetched_at.to_rfc3339_opts(SecondsFormat::Secs, true),
        )
    }

    pub fn parse_line(line: &str, line_no: usize) -> Result<Self, ArchiveError> {
        let malformed = |message: String| ArchiveError::Malformed {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [source_id, date, title, description, link, fetched_at] = fields[..] else {
            return Err(malformed(format!("expected 6 fields, found {}", fields.len())));
        };
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|e| malformed(format!("bad date {date:?}: {e}")))?;
        let fetched_at = DateTime::parse_from_rfc3339(fetched_at)
            .map_err(|e| malformed(format!("bad fetched_at {fetched_at:?}: {e}")))?
            .with_timezone(&Utc);
        Ok(Self {
            source_id: source_id.to_string(),
            date,
            title: title.to_string(),
            description: description.to_string(),
            link: link.to_string(),
            fetched_at,
        })
    }
}

/// Append-only, newline-delimited archive of accepted items.
#[derive(Debug, Clone)]
pub struct Archive {
    path: PathBuf,
}

impl Archive {
    /// Opens (or creates) the archive. A trailing partial line left behind
    /// by an interrupted write is cut off.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, ArchiveError> {
        let path = path.into();
        let io = |source| ArchiveError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .read(true)
            .open(&path)
            .map_err(io)?;
        let len = file.metadata().map_err(io)?.len();
        if len > 0 {
            let mut last = [0u8; 1];
            file.seek(SeekFrom::Start(len - 1)).map_err(io)?;
            file.read_exact(&mut last).map_err(io)?;
            if last[0] != b'\n' {
                let keep = complete_prefix_len(&path).map_err(io)?;
                tracing::warn!(path = %path.display(), dropped = len - keep, "truncating torn archive tail");
                file.set_len(keep).map_err(io)?;
            }
        }
        Ok(Self { path })
    }

    /// Refers to the archive without touching the file.
    pub(crate) fn unopened(path: PathBuf) -> Self {
        Self { path }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn read_all(&self) -> Result<Vec<ArchiveRecord>, ArchiveError> {
        let file = File::open(&self.path).map_err(|source| ArchiveError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        let mut records = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| ArchiveError::Io {
                path: self.path.display().to_string(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            records.push(ArchiveRecord::parse_line(&line, idx + 1)?);
        }
        Ok(records)
    }

    /// Appends records and syncs them to disk.
    pub fn append(&self, records: &[ArchiveRecord]) -> Result<(), ArchiveError> {
        if records.is_empty() {
            return Ok(());
        }
        let io = |source| ArchiveError::Io {
            path: self.path.display().to_string(),
            source,
        };
        let mut buf = String::new();
        for r in records {
            buf.push_str(&r.to_line());
        }
        let mut file = OpenOptions::new().append(true).open(&self.path).map_err(io)?;
        file.write_all(buf.as_bytes()).map_err(io)?;
        file.sync_data().map_err(io)
    }
}

fn complete_prefix_len(path: &Path) -> std::io::Result<u64> {
    let bytes = std::fs::read(path)?;
    Ok(bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i as u64 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn record(title: &str) -> ArchiveRecord {
        ArchiveRecord {
            source_id: "taz".into(),
            date: NaiveDate::from_ymd_opt(2020, 3, 22).unwrap(),
            title: title.into(),
            description: "Zeile eins\nZeile\tzwei".into(),
            link: "https://taz.de/x".into(),
            fetched_at: Utc.with_ymd_and_hms(2020, 3, 22, 9, 0, 0).unwrap(),
        }
    }

    #[test]
    fn line_format() {
        assert_eq!(
            record("Titel").to_line(),
            "taz\t2020-03-22\tTitel\tZeile eins Zeile zwei\thttps://taz.de/x\t2020-03-22T09:00:00Z\n"
        );
    }

    #[test]
    fn append_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let archive = Archive::open(dir.path().join("raw.tsv")).unwrap();
        archive.append(&[record("A"), record("B")]).unwrap();
        archive.append(&[record("C")]).unwrap();
        let back = archive.read_all().unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[2].title, "C");
        assert_eq!(back[0].description, "Zeile eins Zeile zwei");
    }

    #[test]
    fn torn_tail_is_dropped_on_open() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.tsv");
        let mut text = record("A").to_line();
        text.push_str("taz\t2020-03-22\tunvoll");
        std::fs::write(&path, text).unwrap();
        let archive = Archive::open(&path).unwrap();
        assert_eq!(archive.read_all().unwrap().len(), 1);
    }

    #[test]
    fn malformed_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.tsv");
        std::fs::write(&path, "nur\tdrei\tfelder\n").unwrap();
        let err = Archive::open(&path).unwrap().read_all().unwrap_err();
        assert!(matches!(err, ArchiveError::Malformed { line: 1, .. }));
    }
}
