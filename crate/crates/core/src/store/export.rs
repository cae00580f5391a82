//! Plain-text frequency lists.
//!
//! Unigram lists have the header `form<TAB>count`, bigram lists
//! `form1<TAB>form2<TAB>count`. Rows are sorted by count descending, ties by
//! form in byte order. Token sidecars list one token per line. All files are
//! UTF-8 with LF line endings.

use std::collections::HashMap;
use std::fmt::Write as _;

use chrono::{Duration, NaiveDate};

use super::corpus::Corpus;
use super::table::{Bigram, DailyTable};

pub const UNIGRAM_HEADER: &str = "form\tcount";
pub const BIGRAM_HEADER: &str = "form1\tform2\tcount";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("date range {from}..{to} contains no corpus days")]
    EmptyRange { from: NaiveDate, to: NaiveDate },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ListParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Daily,
    Weekly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgramKind {
    Unigram,
    Bigram,
}

/// One exported list: the first day of its period, its file name and body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyList {
    pub period_start: NaiveDate,
    pub file_name: String,
    pub body: String,
}

pub fn unigram_file_name(date: NaiveDate) -> String {
    format!("unigrams-{date}.tsv")
}

pub fn bigram_file_name(date: NaiveDate) -> String {
    format!("bigrams-{date}.tsv")
}

pub fn tokens_file_name(date: NaiveDate) -> String {
    format!("tokens-{date}.txt")
}

pub fn weekly_file_name(kind: NgramKind, week_start: NaiveDate) -> String {
    match kind {
        NgramKind::Unigram => format!("weekly-unigrams-{week_start}.tsv"),
        NgramKind::Bigram => format!("weekly-bigrams-{week_start}.tsv"),
    }
}

/// Count descending, then form ascending.
pub fn sorted_counts<K: Ord>(counts: &HashMap<K, u64>) -> Vec<(&K, u64)> {
    let mut rows: Vec<(&K, u64)> = counts.iter().map(|(k, c)| (k, *c)).collect();
    rows.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    rows
}

pub fn unigram_tsv(counts: &HashMap<String, u64>) -> String {
    let mut out = String::with_capacity(16 * counts.len() + 16);
    out.push_str(UNIGRAM_HEADER);
    out.push('\n');
    for (form, count) in sorted_counts(counts) {
        let _ = writeln!(out, "{form}\t{count}");
    }
    out
}

pub fn bigram_tsv(counts: &HashMap<Bigram, u64>) -> String {
    let mut out = String::with_capacity(24 * counts.len() + 24);
    out.push_str(BIGRAM_HEADER);
    out.push('\n');
    for ((a, b), count) in sorted_counts(counts) {
        let _ = writeln!(out, "{a}\t{b}\t{count}");
    }
    out
}

pub fn tokens_txt(tokens: &[String]) -> String {
    let mut out = String::with_capacity(tokens.iter().map(|t| t.len() + 1).sum());
    for t in tokens {
        out.push_str(t);
        out.push('\n');
    }
    out
}

fn parse_count(raw: &str, line: usize) -> Result<u64, ListParseError> {
    raw.parse().map_err(|e| ListParseError {
        line,
        message: format!("bad count {raw:?}: {e}"),
    })
}

fn body_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>, ListParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => Ok(lines.map(|(i, l)| (i + 1, l))),
        other => Err(ListParseError {
            line: 1,
            message: format!("expected header {header:?}, found {:?}", other.map(|(_, l)| l)),
        }),
    }
}

pub fn parse_unigram_tsv(text: &str) -> Result<HashMap<String, u64>, ListParseError> {
    let mut map = HashMap::new();
    for (line, row) in body_lines(text, UNIGRAM_HEADER)? {
        let Some((form, count)) = row.split_once('\t') else {
            return Err(ListParseError {
                line,
                message: "expected 2 fields".into(),
            });
        };
        map.insert(form.to_string(), parse_count(count, line)?);
    }
    Ok(map)
}

pub fn parse_bigram_tsv(text: &str) -> Result<HashMap<Bigram, u64>, ListParseError> {
    let mut map = HashMap::new();
    for (line, row) in body_lines(text, BIGRAM_HEADER)? {
        let mut fields = row.split('\t');
        let (Some(a), Some(b), Some(count), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(ListParseError {
                line,
                message: "expected 3 fields".into(),
            });
        };
        map.insert((a.to_string(), b.to_string()), parse_count(count, line)?);
    }
    Ok(map)
}

pub fn parse_tokens_txt(text: &str) -> Vec<String> {
    text.lines().map(str::to_string).collect()
}

/// Week number (1-based) of `day`, with week 1 starting on `corpus_start`.
pub fn week_index(day: NaiveDate, corpus_start: NaiveDate) -> i64 {
    (day - corpus_start).num_days().div_euclid(7) + 1
}

pub fn week_start(week: i64, corpus_start: NaiveDate) -> NaiveDate {
    corpus_start + Duration::days(7 * (week - 1))
}

fn list_body(kind: NgramKind, tables: &[&DailyTable]) -> String {
    match kind {
        NgramKind::Unigram => {
            if let [single] = tables {
                return unigram_tsv(single.unigrams());
            }
            let mut merged: HashMap<String, u64> = HashMap::new();
            for t in tables {
                for (form, c) in t.unigrams() {
                    *merged.entry(form.clone()).or_insert(0) += c;
                }
            }
            unigram_tsv(&merged)
        }
        NgramKind::Bigram => {
            if let [single] = tables {
                return bigram_tsv(single.bigrams());
            }
            let mut merged: HashMap<Bigram, u64> = HashMap::new();
            for t in tables {
                for (pair, c) in t.bigrams() {
                    *merged.entry(pair.clone()).or_insert(0) += c;
                }
            }
            bigram_tsv(&merged)
        }
    }
}

/// Daily or weekly frequency lists for the corpus days in `from..=to`.
///
/// Weeks are counted from `corpus_start`; a weekly list covers the days of
/// its week that fall inside the range.
pub fn export_frequency_lists(
    corpus: &Corpus,
    from: NaiveDate,
    to: NaiveDate,
    granularity: Granularity,
    kind: NgramKind,
    corpus_start: NaiveDate,
) -> Result<Vec<FrequencyList>, ExportError> {
    let tables: Vec<&DailyTable> = corpus.range(from, to).collect();
    if tables.is_empty() {
        return Err(ExportError::EmptyRange { from, to });
    }
    let lists = match granularity {
        Granularity::Daily => tables
            .iter()
            .map(|t| FrequencyList {
                period_start: t.date(),
                file_name: match kind {
                    NgramKind::Unigram => unigram_file_name(t.date()),
                    NgramKind::Bigram => bigram_file_name(t.date()),
                },
                body: list_body(kind, std::slice::from_ref(t)),
            })
            .collect(),
        Granularity::Weekly => {
            let mut weeks: Vec<(i64, Vec<&DailyTable>)> = Vec::new();
            for t in tables {
                let w = week_index(t.date(), corpus_start);
                match weeks.last_mut() {
                    Some((last, group)) if *last == w => group.push(t),
                    _ => weeks.push((w, vec![t])),
                }
            }
            weeks
                .into_iter()
                .map(|(w, group)| {
                    let start = week_start(w, corpus_start);
                    FrequencyList {
                        period_start: start,
                        file_name: weekly_file_name(kind, start),
                        body: list_body(kind, &group),
                    }
                })
                .collect()
        }
    };
    Ok(lists)
}
