use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use url::Url;

#[derive(Debug, thiserror::Error)]
pub enum SourceConfigError {
    #[error("reading source config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing source config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("duplicate source id {0:?}")]
    DuplicateId(String),
    #[error("source {id:?}: invalid feed url {url:?}: {reason}")]
    InvalidUrl { id: String, url: String, reason: String },
    #[error("source config lists no sources")]
    Empty,
}

/// A configured newsfeed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedSource {
    pub id: String,
    pub name: String,
    pub url: Url,
    #[serde(default)]
    pub country: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(default)]
    source: Vec<RawSource>,
}

#[derive(Debug, Deserialize)]
struct RawSource {
    id: String,
    name: String,
    url: String,
    #[serde(default)]
    country: String,
    #[serde(default)]
    notes: String,
}

/// The list of harvested feeds, in harvest order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceConfig {
    pub sources: Vec<FeedSource>,
}

impl SourceConfig {
    /// Parses the TOML source list. Relative paths in `url` are resolved
    /// against `base_dir` and turned into `file://` URLs.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, SourceConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        if raw.source.is_empty() {
            return Err(SourceConfigError::Empty);
        }
        let mut seen = HashSet::new();
        let mut sources = Vec::with_capacity(raw.source.len());
        for s in raw.source {
            if !seen.insert(s.id.clone()) {
                return Err(SourceConfigError::DuplicateId(s.id));
            }
            let url = resolve_url(&s.url, base_dir).map_err(|reason| SourceConfigError::InvalidUrl {
                id: s.id.clone(),
                url: s.url.clone(),
                reason,
            })?;
            sources.push(FeedSource {
                id: s.id,
                name: s.name,
                url,
                country: s.country,
                notes: s.notes,
            });
        }
        Ok(Self { sources })
    }

    pub fn load(path: &Path) -> Result<Self, SourceConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| SourceConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, path.parent())
    }
}

fn resolve_url(raw: &str, base_dir: Option<&Path>) -> Result<Url, String> {
    match Url::parse(raw) {
        Ok(url) => match url.scheme() {
            "http" | "https" | "file" => Ok(url),
            other => Err(format!("unsupported scheme {other:?}")),
        },
        Err(url::ParseError::RelativeUrlWithoutBase) => {
            let path = Path::new(raw);
            let full = match base_dir {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.to_path_buf(),
            };
            let full = std::path::absolute(&full).map_err(|e| e.to_string())?;
            Url::from_file_path(&full).map_err(|()| format!("not an absolute path: {}", full.display()))
        }
        Err(e) => Err(e.to_string()),
    }
}
