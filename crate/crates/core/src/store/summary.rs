use std::collections::{BTreeMap, HashSet};

use chrono::Datelike;

use super::corpus::Corpus;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corpus contains no tokens")]
pub struct EmptyCorpus;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// `YYYY-MM`.
    pub period: String,
    pub tokens: u64,
    pub share: f64,
    /// Distinct word forms within the period.
    pub types: usize,
}

/// Corpus size per calendar month.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    pub rows: Vec<SummaryRow>,
}

pub fn monthly_summary(corpus: &Corpus) -> Result<CorpusSummary, EmptyCorpus> {
    let total = corpus.token_total();
    if total == 0 {
        return Err(EmptyCorpus);
    }
    let mut months: BTreeMap<(i32, u32), (u64, HashSet<&str>)> = BTreeMap::new();
    for t in corpus.tables().filter(|t| !t.is_empty()) {
        let entry = months.entry((t.date().year(), t.date().month())).or_default();
        entry.0 += t.token_total();
        entry.1.extend(t.unigrams().keys().map(String::as_str));
    }
    let rows = months
        .into_iter()
        .map(|((y, m), (tokens, types))| SummaryRow {
            period: format!("{y:04}-{m:02}"),
            tokens,
            share: tokens as f64 / total as f64,
            types: types.len(),
        })
        .collect();
    Ok(CorpusSummary { rows })
}
