//! Chronological n-gram corpus built from newsfeed titles and descriptions.
//!
//! The pipeline runs in four stages:
//!
//! - [`ingest`]: fetch configured feeds, bucket items by calendar day,
//!   drop items already seen and append the rest to a raw archive.
//! - [`normalize`]: strip markup and turn text into lowercase word forms.
//! - [`store`]: per-day unigram/bigram tables, persisted as immutable
//!   snapshot generations.
//! - [`metrics`] and [`query`]: vocabulary-diversity measures, the weekly
//!   report, and the frequency-exploration queries served over HTTP.

pub mod ingest;
pub mod metrics;
pub mod normalize;
pub mod pipeline;
pub mod query;
pub mod store;

pub use chrono::NaiveDate;
