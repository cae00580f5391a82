//! Feed harvesting: configured sources, RSS/Atom parsing, day bucketing,
//! deduplication and the append-only raw archive.

mod archive;
mod dedup;
mod feed;
mod fetch;
mod harvest;
mod lock;
mod sources;
mod timestamp;

pub use archive::{Archive, ArchiveError, ArchiveRecord};
pub use dedup::{dedupe, DedupKey, KeyStore};
pub use feed::{parse_feed, FeedEntry, FeedParseError, RawFeedItem};
pub use fetch::{FetchError, Fetcher, DEFAULT_FETCH_TIMEOUT};
pub use harvest::{CycleReport, HarvestError, Harvester, SourceOutcome};
pub use lock::{CycleLock, LockError};
pub use sources::{FeedSource, SourceConfig, SourceConfigError};
pub use timestamp::{day_of_item, normalize_timestamp, TimestampParseError};
