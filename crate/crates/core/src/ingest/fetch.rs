use std::time::Duration;

use chrono::{DateTime, Utc};

use super::feed::{parse_feed, FeedParseError, RawFeedItem};
use super::sources::FeedSource;

pub const DEFAULT_FETCH_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("network error: {0}")]
    Network(String),
    #[error("feed parse error: {0}")]
    Parse(#[from] FeedParseError),
}

/// Fetches one feed document over HTTP(S) or from a `file://` URL.
#[derive(Debug, Clone)]
pub struct Fetcher {
    client: reqwest::Client,
}

impl Fetcher {
    pub fn new(timeout: Duration) -> Result<Self, FetchError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("feedgram/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| FetchError::Network(e.to_string()))?;
        Ok(Self { client })
    }

    async fn fetch_bytes(&self, source: &FeedSource) -> Result<Vec<u8>, FetchError> {
        if source.url.scheme() == "file" {
            let path = source
                .url
                .to_file_path()
                .map_err(|()| FetchError::Network(format!("bad file url {}", source.url)))?;
            return tokio::fs::read(&path)
                .await
                .map_err(|e| FetchError::Network(format!("{}: {e}", path.display())));
        }
        let response = self
            .client
            .get(source.url.clone())
            .send()
            .await
            .map_err(|e| FetchError::Network(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(FetchError::Network(format!("HTTP {status}")));
        }
        let bytes = response
            .bytes()
            .await
            .map_err(|e| FetchError::Network(e.to_string()))?;
        Ok(bytes.to_vec())
    }

    /// Every entry currently in the feed, in feed order. Entries with neither
    /// title nor description text are skipped.
    pub async fn fetch_feed(
        &self,
        source: &FeedSource,
        fetched_at: DateTime<Utc>,
    ) -> Result<Vec<RawFeedItem>, FetchError> {
        let bytes = self.fetch_bytes(source).await?;
        let text = decode_document(&bytes);
        let entries = parse_feed(&text)?;
        Ok(entries
            .into_iter()
            .filter_map(|e| RawFeedItem::new(&source.id, e, fetched_at))
            .collect())
    }
}

/// Decodes a feed document using its BOM or XML declaration; UTF-8 otherwise.
pub(crate) fn decode_document(bytes: &[u8]) -> String {
    if let Some((encoding, bom_len)) = encoding_rs::Encoding::for_bom(bytes) {
        return encoding.decode_without_bom_handling(&bytes[bom_len..]).0.into_owned();
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(200)]);
    let declared = head
        .strip_prefix("<?xml")
        .and_then(|rest| rest.split("?>").next())
        .and_then(|decl| decl.split("encoding=").nth(1))
        .and_then(|v| {
            let quote = v.chars().next()?;
            v[1..].split(quote).next()
        })
        .and_then(|label| encoding_rs::Encoding::for_label(label.as_bytes()));
    let encoding = declared.unwrap_or(encoding_rs::UTF_8);
    encoding.decode_without_bom_handling(bytes).0.into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_latin1_declaration() {
        let mut doc = b"<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?><rss><t>".to_vec();
        doc.push(0xe4);
        doc.extend_from_slice(b"</t></rss>");
        assert!(decode_document(&doc).contains("<t>ä</t>"));
    }

    #[test]
    fn defaults_to_utf8() {
        assert_eq!(decode_document("<rss>ä</rss>".as_bytes()), "<rss>ä</rss>");
        let mut bom = vec![0xef, 0xbb, 0xbf];
        bom.extend_from_slice("<rss/>".as_bytes());
        assert_eq!(decode_document(&bom), "<rss/>");
    }

    #[tokio::test]
    async fn missing_file_is_a_network_error() {
        let fetcher = Fetcher::new(DEFAULT_FETCH_TIMEOUT).unwrap();
        let source = FeedSource {
            id: "x".into(),
            name: "X".into(),
            url: url::Url::parse("file:///nonexistent/feed.xml").unwrap(),
            country: String::new(),
            notes: String::new(),
        };
        assert!(matches!(
            fetcher.fetch_feed(&source, Utc::now()).await,
            Err(FetchError::Network(_))
        ));
    }
}
