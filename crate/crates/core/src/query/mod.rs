//! Frequency queries over an immutable corpus index.

mod engine;
mod index;
mod pattern;
mod smoothing;

pub use engine::{
    find_bigrams, match_bigram, match_exact, match_within, run_query, series_totals, to_csv,
    BigramHit, BigramMode, Denominators, HitRow, MatchMode, PatternSeries, QueryError,
    QueryResult, QuerySpec, SeriesKind, SeriesPoint, UnknownMode, CSV_HEADER,
    DEFAULT_BIGRAM_LIMIT, DEFAULT_PATTERN_LIMIT,
};
pub use index::{CorpusIndex, IndexBuilder};
pub use pattern::{sanitize_pattern, Pattern, TooManyWords, REGEX_SPECIALS};
pub use smoothing::{rolling_mean, window_extent, MAX_WINDOW, MIN_WINDOW};
