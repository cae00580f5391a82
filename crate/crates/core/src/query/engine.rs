use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::index::CorpusIndex;
use super::pattern::{sanitize_pattern, Pattern};
use super::smoothing::{rolling_mean, MAX_WINDOW, MIN_WINDOW};

pub const DEFAULT_PATTERN_LIMIT: usize = 10;
pub const DEFAULT_BIGRAM_LIMIT: usize = 200;
pub const CSV_HEADER: &str = "date,pattern,abs,rel,smoothed";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("too many patterns: {count} (limit {limit})")]
    TooManyPatterns { count: usize, limit: usize },
    #[error("no corpus data between {from} and {to}")]
    EmptyRange { from: NaiveDate, to: NaiveDate },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    #[default]
    Exact,
    Within,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BigramMode {
    #[default]
    Anywhere,
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} {value:?}")]
pub struct UnknownMode {
    kind: &'static str,
    value: String,
}

impl FromStr for MatchMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "within" => Ok(Self::Within),
            _ => Err(UnknownMode {
                kind: "match mode",
                value: s.to_string(),
            }),
        }
    }
}

impl FromStr for BigramMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "anywhere" => Ok(Self::Anywhere),
            "first" => Ok(Self::First),
            "second" => Ok(Self::Second),
            _ => Err(UnknownMode {
                kind: "bigram mode",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Within => "within",
        })
    }
}

impl fmt::Display for BigramMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Anywhere => "anywhere",
            Self::First => "first",
            Self::Second => "second",
        })
    }
}

/// A validated query.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub patterns: Vec<Pattern>,
    pub mode: MatchMode,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub window: u32,
    /// Messages about input that was dropped or merged.
    pub notices: Vec<String>,
}

impl QuerySpec {
    /// Builds a spec from raw user patterns. Each is sanitized; empty ones
    /// are dropped with a notice and repeats collapse to the first.
    pub fn new<S: AsRef<str>>(
        raw_patterns: impl IntoIterator<Item = S>,
        mode: MatchMode,
        from: NaiveDate,
        to: NaiveDate,
        window: u32,
        max_patterns: usize,
    ) -> Result<Self, QueryError> {
        if !(MIN_WINDOW..=MAX_WINDOW).contains(&window) {
            return Err(QueryError::InvalidQuery(format!(
                "window {window} outside {MIN_WINDOW}..={MAX_WINDOW}"
            )));
        }
        if from > to {
            return Err(QueryError::InvalidQuery(format!(
                "date range starts after it ends ({from} > {to})"
            )));
        }
        let mut notices = Vec::new();
        let mut patterns: Vec<Pattern> = Vec::new();
        for raw in raw_patterns {
            let raw = raw.as_ref();
            let clean = sanitize_pattern(raw);
            if clean.is_empty() {
                if !raw.trim().is_empty() {
                    notices.push(format!("pattern {raw:?} is empty after removing special characters"));
                }
                continue;
            }
            let pattern =
                Pattern::classify(&clean).map_err(|e| QueryError::InvalidQuery(e.to_string()))?;
            if patterns.contains(&pattern) {
                notices.push(format!("duplicate pattern {:?} ignored", pattern.label()));
                continue;
            }
            patterns.push(pattern);
        }
        if patterns.is_empty() {
            return Err(QueryError::InvalidQuery("no usable pattern".into()));
        }
        if patterns.len() > max_patterns {
            return Err(QueryError::TooManyPatterns {
                count: patterns.len(),
                limit: max_patterns,
            });
        }
        Ok(Self {
            patterns,
            mode,
            from,
            to,
            window,
            notices,
        })
    }

    /// Splits a comma-separated pattern list.
    pub fn parse(
        patterns: &str,
        mode: MatchMode,
        from: NaiveDate,
        to: NaiveDate,
        window: u32,
        max_patterns: usize,
    ) -> Result<Self, QueryError> {
        Self::new(patterns.split(','), mode, from, to, window, max_patterns)
    }

    /// Like [`QuerySpec::parse`], with missing dates taken from the bounds
    /// of `index`.
    pub fn parse_for(
        index: &CorpusIndex,
        patterns: &str,
        mode: MatchMode,
        from: Option<NaiveDate>,
        to: Option<NaiveDate>,
        window: u32,
        max_patterns: usize,
    ) -> Result<Self, QueryError> {
        let (Some(first), Some(last)) = (index.first_date(), index.last_date()) else {
            return Err(QueryError::InvalidQuery("the corpus is empty".into()));
        };
        let from = from.unwrap_or(first);
        let to = to.unwrap_or(last);
        Self::parse(patterns, mode, from, to, window, max_patterns)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub abs: u64,
    pub rel: f64,
    pub smoothed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSeries {
    pub pattern: String,
    pub kind: SeriesKind,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Unigram,
    Bigram,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRow {
    pub form: String,
    pub pattern: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Denominators {
    pub unigram: String,
    pub bigram: String,
}

impl Default for Denominators {
    fn default() -> Self {
        Self {
            unigram: "daily token_total (all word tokens of the day)".into(),
            bigram: "daily bigram_total (all adjacent word pairs of the day)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub mode: MatchMode,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub window: u32,
    pub denominators: Denominators,
    pub series: Vec<PatternSeries>,
    /// Present in within mode: one row per (form, pattern) with a non-zero
    /// count in the range.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hits: Option<Vec<HitRow>>,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigramHit {
    pub first: String,
    pub second: String,
    pub count: u64,
}

impl BigramHit {
    pub fn text(&self) -> String {
        format!("{} {}", self.first, self.second)
    }
}

fn resolve(index: &CorpusIndex, from: NaiveDate, to: NaiveDate) -> Result<(u32, u32), QueryError> {
    index
        .day_range(from, to)
        .ok_or(QueryError::EmptyRange { from, to })
}

fn build_series(
    index: &CorpusIndex,
    from: u32,
    counts: Vec<u64>,
    totals: &[u64],
    window: u32,
) -> Vec<SeriesPoint> {
    let rel: Vec<f64> = counts
        .iter()
        .zip(totals)
        .map(|(c, t)| if *t == 0 { 0.0 } else { *c as f64 / *t as f64 })
        .collect();
    let smoothed = rolling_mean(&rel, window as usize);
    counts
        .into_iter()
        .zip(rel)
        .zip(smoothed)
        .enumerate()
        .map(|(i, ((abs, rel), smoothed))| SeriesPoint {
            date: index.date_of(from + i as u32),
            abs,
            rel,
            smoothed,
        })
        .collect()
}

fn exact_counts(index: &CorpusIndex, form: &str, from: u32, to: u32) -> Vec<u64> {
    match index.form_id(form) {
        Some(id) => index.unigram_counts(id, from, to),
        None => vec![0; (to - from + 1) as usize],
    }
}

/// Daily counts summed over `forms`, plus each form's total with a non-zero
/// count over the range.
fn within_counts(index: &CorpusIndex, forms: &[u32], from: u32, to: u32) -> (Vec<u64>, Vec<(u32, u64)>) {
    let mut out = vec![0; (to - from + 1) as usize];
    let mut totals = Vec::new();
    for id in forms {
        let total = index.add_unigram_counts(*id, from, to, &mut out);
        if total > 0 {
            totals.push((*id, total));
        }
    }
    (out, totals)
}

/// A hit before its strings are materialized: form id, pattern position,
/// count.
type RawHit = (u32, usize, u64);

fn hit_rows(index: &CorpusIndex, mut raw: Vec<RawHit>, patterns: &[&str]) -> Vec<HitRow> {
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.sort_by_key(|p| patterns[*p]);
    let mut pattern_rank = vec![0; patterns.len()];
    for (rank, p) in order.into_iter().enumerate() {
        pattern_rank[p] = rank;
    }
    raw.sort_unstable_by_key(|(id, p, count)| (std::cmp::Reverse(*count), index.form_rank(*id), pattern_rank[*p]));
    raw.into_iter()
        .map(|(id, p, count)| HitRow {
            form: index.form(id).to_string(),
            pattern: patterns[p].to_string(),
            count,
        })
        .collect()
}

fn bigram_counts(index: &CorpusIndex, first: &str, second: &str, from: u32, to: u32) -> Vec<u64> {
    match index.bigram_id(first, second) {
        Some(id) => index.bigram_counts(id, from, to),
        None => vec![0; (to - from + 1) as usize],
    }
}

/// Daily counts of the word form equal to `form`, relative to token totals.
pub fn match_exact(
    index: &CorpusIndex,
    form: &str,
    from: NaiveDate,
    to: NaiveDate,
    window: u32,
) -> Result<Vec<SeriesPoint>, QueryError> {
    let (a, b) = resolve(index, from, to)?;
    let counts = exact_counts(index, form, a, b);
    Ok(build_series(index, a, counts, index.token_totals(a, b), window))
}

/// Daily counts summed over every form containing `pattern`, with the
/// per-form totals over the range sorted by count.
pub fn match_within(
    index: &CorpusIndex,
    pattern: &str,
    from: NaiveDate,
    to: NaiveDate,
    window: u32,
) -> Result<(Vec<SeriesPoint>, Vec<HitRow>), QueryError> {
    let (a, b) = resolve(index, from, to)?;
    let forms = index.forms_containing(pattern);
    let (counts, totals) = within_counts(index, &forms, a, b);
    let raw = totals.into_iter().map(|(id, n)| (id, 0, n)).collect();
    let hits = hit_rows(index, raw, &[pattern]);
    let series = build_series(index, a, counts, index.token_totals(a, b), window);
    Ok((series, hits))
}

/// Daily counts of the bigram `(first, second)`, relative to bigram totals.
pub fn match_bigram(
    index: &CorpusIndex,
    first: &str,
    second: &str,
    from: NaiveDate,
    to: NaiveDate,
    window: u32,
) -> Result<Vec<SeriesPoint>, QueryError> {
    let (a, b) = resolve(index, from, to)?;
    let counts = bigram_counts(index, first, second, a, b);
    Ok(build_series(index, a, counts, index.bigram_totals(a, b), window))
}

/// Runs every pattern of `spec` over the part of its range covered by the
/// index. Series keep the pattern order of the spec.
pub fn run_query(index: &CorpusIndex, spec: &QuerySpec) -> Result<QueryResult, QueryError> {
    let (a, b) = resolve(index, spec.from, spec.to)?;
    let mut notices = spec.notices.clone();
    let (from, to) = (index.date_of(a), index.date_of(b));
    if (from, to) != (spec.from, spec.to) {
        notices.push(format!("date range limited to the corpus: {from} to {to}"));
    }
    let tokens = index.token_totals(a, b);
    let pairs = index.bigram_totals(a, b);
    let mut series = Vec::with_capacity(spec.patterns.len());
    let mut raw_hits: Vec<RawHit> = Vec::new();
    let mut hit_patterns: Vec<&str> = Vec::new();
    for pattern in &spec.patterns {
        let (kind, points) = match pattern {
            Pattern::Bigram { first, second } => {
                let counts = bigram_counts(index, first, second, a, b);
                (SeriesKind::Bigram, build_series(index, a, counts, pairs, spec.window))
            }
            Pattern::Unigram { form } => {
                let counts = match spec.mode {
                    MatchMode::Exact => exact_counts(index, form, a, b),
                    MatchMode::Within => {
                        let forms = index.forms_containing(form);
                        let (counts, totals) = within_counts(index, &forms, a, b);
                        let p = hit_patterns.len();
                        hit_patterns.push(form);
                        raw_hits.extend(totals.into_iter().map(|(id, n)| (id, p, n)));
                        counts
                    }
                };
                (SeriesKind::Unigram, build_series(index, a, counts, tokens, spec.window))
            }
        };
        series.push(PatternSeries {
            pattern: pattern.label(),
            kind,
            points,
        });
    }
    let hits = (spec.mode == MatchMode::Within).then(|| hit_rows(index, raw_hits, &hit_patterns));
    Ok(QueryResult {
        mode: spec.mode,
        from,
        to,
        window: spec.window,
        denominators: Denominators::default(),
        series,
        hits,
        notices,
    })
}

/// Bigrams matching `pattern` in the given mode, with counts summed over the
/// range. Sorted by count descending, then text ascending; zero-count bigrams
/// are left out.
pub fn find_bigrams(
    index: &CorpusIndex,
    raw_pattern: &str,
    mode: BigramMode,
    from: NaiveDate,
    to: NaiveDate,
    limit: usize,
) -> Result<Vec<BigramHit>, QueryError> {
    let pattern = sanitize_pattern(raw_pattern);
    if pattern.is_empty() {
        return Err(QueryError::InvalidQuery("empty pattern".into()));
    }
    if pattern.contains(' ') {
        return Err(QueryError::InvalidQuery(format!(
            "bigram finder takes a single word, got {pattern:?}"
        )));
    }
    if from > to {
        return Err(QueryError::InvalidQuery(format!(
            "date range starts after it ends ({from} > {to})"
        )));
    }
    let (a, b) = resolve(index, from, to)?;
    let exact = index.form_id(&pattern);
    let matching: HashSet<u32> = match mode {
        BigramMode::Anywhere => index.forms_containing(&pattern).into_iter().collect(),
        _ => exact.into_iter().collect(),
    };
    let mut out: Vec<BigramHit> = index
        .bigrams()
        .filter(|(_, (f1, f2))| match mode {
            BigramMode::Anywhere => matching.contains(f1) || matching.contains(f2),
            BigramMode::First => matching.contains(f1),
            BigramMode::Second => matching.contains(f2),
        })
        .filter_map(|(id, (f1, f2))| {
            let count = index.bigram_total(id, a, b);
            (count > 0).then(|| BigramHit {
                first: index.form(f1).to_string(),
                second: index.form(f2).to_string(),
                count,
            })
        })
        .collect();
    out.sort_by(|x, y| {
        y.count
            .cmp(&x.count)
            .then_with(|| (&x.first, &x.second).cmp(&(&y.first, &y.second)))
    });
    out.truncate(limit);
    Ok(out)
}

/// Long-format CSV of a result: one row per day and series, days ascending,
/// series in query order. `smoothed` is empty where no full window exists.
pub fn to_csv(result: &QueryResult) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    let days = result.series.first().map_or(0, |s| s.points.len());
    for day in 0..days {
        for s in &result.series {
            let p = &s.points[day];
            w.write_record([
                p.date.to_string(),
                s.pattern.clone(),
                p.abs.to_string(),
                p.rel.to_string(),
                p.smoothed.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Per-pattern totals over the result's range, as shown next to a chart.
pub fn series_totals(result: &QueryResult) -> HashMap<String, u64> {
    result
        .series
        .iter()
        .map(|s| (s.pattern.clone(), s.points.iter().map(|p| p.abs).sum()))
        .collect()
}
