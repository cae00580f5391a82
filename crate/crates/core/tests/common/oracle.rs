//! Brute-force reference implementations used to check the real code.
//! Everything here scans daily tables directly and shares no code with the
//! query index.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use chrono::{Duration, NaiveDate};
use feedgram_core::normalize::{TextUnit, TokenSequence};
use feedgram_core::store::{Corpus, CorpusItem};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const SPECIALS: &str = "\\^$.|?*+()[]{}";

pub fn sanitize(raw: &str) -> String {
    let kept: String = raw.chars().filter(|c| !SPECIALS.contains(*c)).collect();
    let words: Vec<&str> = kept.split_whitespace().collect();
    words.join(" ").to_lowercase()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub date: NaiveDate,
    pub abs: u64,
    pub rel: f64,
    pub smoothed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub series: Vec<(String, Vec<Point>)>,
    pub hits: Option<Vec<(String, String, u64)>>,
}

pub fn windowed_mean(values: &[f64], window: usize) -> Vec<Option<f64>> {
    let before = window / 2;
    let after = (window - 1) / 2;
    let mut out = Vec::new();
    for i in 0..values.len() {
        if (i as i64) - (before as i64) < 0 || i + after > values.len() - 1 {
            out.push(None);
            continue;
        }
        let mut sum = 0.0;
        for v in &values[i - before..i + after + 1] {
            sum += v;
        }
        out.push(Some(sum / window as f64));
    }
    out
}

fn days(corpus: &Corpus, from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
    let from = from.max(corpus.first_date().unwrap());
    let to = to.min(corpus.last_date().unwrap());
    let mut out = Vec::new();
    let mut d = from;
    while d <= to {
        out.push(d);
        d += Duration::days(1);
    }
    out
}

fn ratio(c: u64, t: u64) -> f64 {
    if t == 0 {
        0.0
    } else {
        c as f64 / t as f64
    }
}

/// Answers a query by scanning every table in the range. `patterns` are raw
/// user strings; empty and repeated ones are skipped.
pub fn answer(
    corpus: &Corpus,
    patterns: &[&str],
    within: bool,
    from: NaiveDate,
    to: NaiveDate,
    window: usize,
) -> Answer {
    let dates = days(corpus, from, to);
    let mut seen = Vec::new();
    let mut series = Vec::new();
    let mut hits = Vec::new();
    for raw in patterns {
        let p = sanitize(raw);
        if p.is_empty() || seen.contains(&p) {
            continue;
        }
        seen.push(p.clone());
        let parts: Vec<&str> = p.split(' ').collect();
        let mut abs = Vec::new();
        let mut rel = Vec::new();
        let mut per_form: BTreeMap<String, u64> = BTreeMap::new();
        for d in &dates {
            let t = corpus.get(*d).expect("gap days are filled");
            let (c, total) = if parts.len() == 2 {
                let key = (parts[0].to_string(), parts[1].to_string());
                (t.bigrams().get(&key).copied().unwrap_or(0), t.bigram_total())
            } else if within {
                let mut c = 0;
                for (form, n) in t.unigrams() {
                    if form.contains(&p) {
                        c += n;
                        *per_form.entry(form.clone()).or_default() += n;
                    }
                }
                (c, t.token_total())
            } else {
                (t.unigrams().get(&p).copied().unwrap_or(0), t.token_total())
            };
            abs.push(c);
            rel.push(ratio(c, total));
        }
        for (form, n) in per_form {
            if n > 0 {
                hits.push((form, p.clone(), n));
            }
        }
        let smooth = windowed_mean(&rel, window);
        let points = dates
            .iter()
            .enumerate()
            .map(|(i, d)| Point {
                date: *d,
                abs: abs[i],
                rel: rel[i],
                smoothed: smooth[i],
            })
            .collect();
        series.push((p, points));
    }
    hits.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    Answer {
        series,
        hits: within.then_some(hits),
    }
}

/// Bigram finder by full scan.
pub fn bigrams(
    corpus: &Corpus,
    pattern: &str,
    mode: &str,
    from: NaiveDate,
    to: NaiveDate,
    limit: usize,
) -> Vec<(String, String, u64)> {
    let p = sanitize(pattern);
    let mut totals: HashMap<(String, String), u64> = HashMap::new();
    for d in days(corpus, from, to) {
        for ((a, b), n) in corpus.get(d).unwrap().bigrams() {
            let keep = match mode {
                "anywhere" => a.contains(&p) || b.contains(&p),
                "first" => *a == p,
                "second" => *b == p,
                _ => unreachable!(),
            };
            if keep {
                *totals.entry((a.clone(), b.clone())).or_default() += n;
            }
        }
    }
    let mut out: Vec<_> = totals
        .into_iter()
        .filter(|(_, n)| *n > 0)
        .map(|((a, b), n)| (a, b, n))
        .collect();
    out.sort_by(|x, y| y.2.cmp(&x.2).then(format!("{} {}", x.0, x.1).cmp(&format!("{} {}", y.0, y.1))));
    out.truncate(limit);
    out
}

/// Forms that make substring matches interesting.
pub const SEED_FORMS: [&str; 16] = [
    "corona", "coronavirus", "coronakrise", "maske", "masken", "maskenpflicht", "schutzmasken",
    "neue", "neuen", "normalität", "alltag", "das", "der", "und", "wegen", "fc",
];

/// A random corpus over `days` consecutive days with at most `vocab` types.
/// Some days are left empty.
pub fn random_corpus(rng: &mut impl Rng, start: NaiveDate, days: i64, vocab: usize) -> Corpus {
    let mut forms: Vec<String> = SEED_FORMS.iter().map(|s| s.to_string()).collect();
    while forms.len() < vocab {
        let len = rng.random_range(2..7);
        let w: String = (0..len)
            .map(|_| *b"aeiounrstlmk".choose(rng).unwrap() as char)
            .collect();
        if !forms.contains(&w) {
            forms.push(w);
        }
    }
    forms.truncate(vocab);
    let mut corpus = Corpus::new();
    for day in 0..days {
        let date = start + Duration::days(day);
        if day > 0 && day < days - 1 && rng.random_bool(0.15) {
            continue;
        }
        for _ in 0..rng.random_range(1..6) {
            let mut seq = |unit| TokenSequence {
                unit,
                tokens: (0..rng.random_range(0..9))
                    .map(|_| forms.choose(rng).unwrap().clone())
                    .collect(),
            };
            let title = seq(TextUnit::Title);
            let description = seq(TextUnit::Description);
            corpus.add_item(&CorpusItem {
                source_id: format!("s{}", rng.random_range(0..3)),
                date,
                title,
                description,
            });
        }
    }
    // Rebuild so that skipped days in between exist as empty tables.
    let tables: Vec<_> = corpus.tables().cloned().collect();
    Corpus::from_tables(tables)
}

/// A random pattern list drawn from the corpus vocabulary, with noise.
pub fn random_patterns(rng: &mut impl Rng, corpus: &Corpus) -> Vec<String> {
    let mut vocab: Vec<String> = corpus
        .tables()
        .flat_map(|t| t.unigrams().keys().cloned())
        .collect();
    vocab.sort();
    vocab.dedup();
    let bigram_keys: Vec<(String, String)> = {
        let mut v: Vec<_> = corpus
            .tables()
            .flat_map(|t| t.bigrams().keys().cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let n = rng.random_range(1..5);
    (0..n)
        .map(|_| match rng.random_range(0..6) {
            0 if !bigram_keys.is_empty() => {
                let (a, b) = bigram_keys.choose(rng).unwrap();
                format!("{a} {b}")
            }
            1 => {
                let w = vocab.choose(rng).unwrap();
                let cut = rng.random_range(1..=w.chars().count());
                w.chars().take(cut).collect()
            }
            2 => format!(" ^{}$ ", vocab.choose(rng).unwrap().to_uppercase()),
            3 => "zzz".to_string(),
            _ => vocab.choose(rng).unwrap().clone(),
        })
        .collect()
}
