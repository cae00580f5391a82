//! Per-day n-gram tables, their plain-text snapshot files and corpus
//! statistics.

mod corpus;
pub mod export;
pub mod snapshot;
mod summary;
mod table;

pub use corpus::Corpus;
pub use export::{export_frequency_lists, FrequencyList, Granularity, NgramKind};
pub use snapshot::{
    load_corpus, load_index, read_meta, CorpusMeta, SnapshotError, SnapshotStore, META_FILE,
};
pub use summary::{monthly_summary, CorpusSummary, EmptyCorpus, SummaryRow};
pub use table::{Bigram, CorpusItem, DailyTable, TableError};
