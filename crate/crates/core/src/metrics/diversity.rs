use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use chrono::NaiveDate;

use crate::store::DailyTable;

pub const DEFAULT_MSTTR_SEGMENT: usize = 100;
pub const DEFAULT_TOP_K: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("frequency distribution is empty")]
    EmptyDistribution,
    #[error("day {0} has no tokens")]
    EmptyDay(NaiveDate),
    #[error("token stream of {len} tokens is shorter than one segment of {segment}")]
    StreamTooShort { len: usize, segment: usize },
    #[error("segment length must be at least 1")]
    ZeroSegment,
}

/// Shannon entropy in bits of a frequency distribution.
pub fn entropy<'a>(counts: impl IntoIterator<Item = &'a u64>) -> Result<f64, MetricError> {
    let counts: Vec<u64> = counts.into_iter().copied().filter(|c| *c > 0).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(MetricError::EmptyDistribution);
    }
    let total = total as f64;
    let h = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    // A single type yields -1 * log2(1) = -0.0.
    Ok(h.max(0.0))
}

/// `1 - H / log2(V)` over the day's unigram distribution; a day with a
/// single type is maximally redundant (1).
pub fn redundancy(table: &DailyTable) -> Result<f64, MetricError> {
    if table.token_total() == 0 {
        return Err(MetricError::EmptyDay(table.date()));
    }
    redundancy_of(table.unigrams().values())
}

pub fn redundancy_of<'a>(counts: impl IntoIterator<Item = &'a u64>) -> Result<f64, MetricError> {
    let counts: Vec<u64> = counts.into_iter().copied().filter(|c| *c > 0).collect();
    let h = entropy(&counts)?;
    if counts.len() < 2 {
        return Ok(1.0);
    }
    let h_max = (counts.len() as f64).log2();
    Ok((1.0 - h / h_max).clamp(0.0, 1.0))
}

/// Mean segmental type-token ratio: the stream is cut into consecutive
/// segments of `segment` tokens, the trailing remainder is dropped, and the
/// per-segment type-token ratios are averaged.
pub fn msttr<T: Eq + Hash>(tokens: &[T], segment: usize) -> Result<f64, MetricError> {
    if segment == 0 {
        return Err(MetricError::ZeroSegment);
    }
    if tokens.len() < segment {
        return Err(MetricError::StreamTooShort {
            len: tokens.len(),
            segment,
        });
    }
    let mut seen: HashSet<&T> = HashSet::with_capacity(segment);
    let mut sum = 0.0;
    let mut segments = 0usize;
    for chunk in tokens.chunks_exact(segment) {
        seen.clear();
        seen.extend(chunk.iter());
        sum += seen.len() as f64 / segment as f64;
        segments += 1;
    }
    Ok(sum / segments as f64)
}

/// Share of the day's tokens held by its `k` most frequent forms. Ties at
/// the cut-off are broken by form, which does not change the sum.
pub fn top_k_share(table: &DailyTable, k: usize) -> Result<f64, MetricError> {
    if table.token_total() == 0 {
        return Err(MetricError::EmptyDay(table.date()));
    }
    Ok(top_k_share_of(table.unigrams(), k))
}

pub fn top_k_share_of(counts: &HashMap<String, u64>, k: usize) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let mut rows: Vec<(&String, u64)> = counts.iter().map(|(f, c)| (f, *c)).collect();
    rows.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top: u64 = rows.iter().take(k).map(|(_, c)| c).sum();
    top as f64 / total as f64
}

/// The three daily diversity measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityRecord {
    pub date: NaiveDate,
    pub redundancy: f64,
    /// `None` when the day has fewer tokens than one segment.
    pub msttr: Option<f64>,
    pub top100_share: f64,
}

/// Measures for one day. Needs the table's token stream for MSTTR.
pub fn diversity_record(table: &DailyTable, segment: usize) -> Result<DiversityRecord, MetricError> {
    let msttr = match msttr(table.token_order(), segment) {
        Ok(v) => Some(v),
        Err(MetricError::StreamTooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DiversityRecord {
        date: table.date(),
        redundancy: redundancy(table)?,
        msttr,
        top100_share: top_k_share(table, DEFAULT_TOP_K)?,
    })
}
