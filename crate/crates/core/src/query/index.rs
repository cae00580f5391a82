use std::collections::HashMap;

use chrono::{Duration, NaiveDate};

use crate::store::{Corpus, DailyTable};

type Posting = (u32, u64);

/// Inverted index over a run of consecutive calendar days: for every word
/// form and every bigram, the days it occurs on and its count there.
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    first: Option<NaiveDate>,
    token_totals: Vec<u64>,
    bigram_totals: Vec<u64>,
    forms: Vec<String>,
    form_ids: HashMap<String, u32>,
    /// Position of each form in byte-wise sorted order.
    form_ranks: Vec<u32>,
    unigram_postings: PostingTable,
    bigram_keys: Vec<(u32, u32)>,
    bigram_ids: HashMap<(u32, u32), u32>,
    bigram_postings: PostingTable,
}

/// Postings of many keys in one contiguous buffer.
#[derive(Debug, Clone, Default)]
struct PostingTable {
    starts: Vec<usize>,
    entries: Vec<Posting>,
}

impl PostingTable {
    fn from_lists(lists: Vec<Vec<Posting>>) -> Self {
        let mut starts = Vec::with_capacity(lists.len() + 1);
        let mut entries = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        starts.push(0);
        for list in lists {
            entries.extend(list);
            starts.push(entries.len());
        }
        Self { starts, entries }
    }

    fn get(&self, id: u32) -> &[Posting] {
        let id = id as usize;
        &self.entries[self.starts[id]..self.starts[id + 1]]
    }
}

/// Feeds days to a [`CorpusIndex`] in calendar order.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    index: CorpusIndex,
    unigrams: Vec<Vec<Posting>>,
    bigrams: Vec<Vec<Posting>>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, form: &str) -> u32 {
        if let Some(id) = self.index.form_ids.get(form) {
            return *id;
        }
        let id = self.index.forms.len() as u32;
        self.index.forms.push(form.to_string());
        self.index.form_ids.insert(form.to_string(), id);
        self.unigrams.push(Vec::new());
        id
    }

    /// Adds the next day. Days must be consecutive; skipped days are
    /// inserted as empty.
    ///
    /// # Panics
    /// If `date` is not after the previously added day.
    pub fn add_day<'a>(
        &mut self,
        date: NaiveDate,
        unigrams: impl IntoIterator<Item = (&'a str, u64)>,
        bigrams: impl IntoIterator<Item = ((&'a str, &'a str), u64)>,
    ) {
        let first = *self.index.first.get_or_insert(date);
        let offset = (date - first).num_days();
        assert!(
            offset >= self.index.token_totals.len() as i64,
            "days must be added in increasing order"
        );
        while (self.index.token_totals.len() as i64) < offset {
            self.index.token_totals.push(0);
            self.index.bigram_totals.push(0);
        }
        let day = offset as u32;
        let mut tokens = 0;
        for (form, count) in unigrams {
            let id = self.intern(form);
            self.unigrams[id as usize].push((day, count));
            tokens += count;
        }
        let mut pairs = 0;
        for ((a, b), count) in bigrams {
            let key = (self.intern(a), self.intern(b));
            let id = match self.index.bigram_ids.get(&key) {
                Some(id) => *id,
                None => {
                    let id = self.index.bigram_keys.len() as u32;
                    self.index.bigram_keys.push(key);
                    self.index.bigram_ids.insert(key, id);
                    self.bigrams.push(Vec::new());
                    id
                }
            };
            self.bigrams[id as usize].push((day, count));
            pairs += count;
        }
        self.index.token_totals.push(tokens);
        self.index.bigram_totals.push(pairs);
    }

    pub fn add_table(&mut self, table: &DailyTable) {
        self.add_day(
            table.date(),
            table.unigrams().iter().map(|(f, c)| (f.as_str(), *c)),
            table
                .bigrams()
                .iter()
                .map(|((a, b), c)| ((a.as_str(), b.as_str()), *c)),
        );
    }

    pub fn finish(mut self) -> CorpusIndex {
        let forms = &self.index.forms;
        let mut order: Vec<u32> = (0..forms.len() as u32).collect();
        order.sort_unstable_by(|a, b| forms[*a as usize].cmp(&forms[*b as usize]));
        let mut ranks = vec![0; forms.len()];
        for (rank, id) in order.into_iter().enumerate() {
            ranks[id as usize] = rank as u32;
        }
        self.index.form_ranks = ranks;
        self.index.unigram_postings = PostingTable::from_lists(self.unigrams);
        self.index.bigram_postings = PostingTable::from_lists(self.bigrams);
        self.index
    }
}

/// Sum of the postings that fall on days `from..=to`.
fn sum_range(postings: &[Posting], from: u32, to: u32) -> u64 {
    let start = postings.partition_point(|p| p.0 < from);
    postings[start..]
        .iter()
        .take_while(|p| p.0 <= to)
        .map(|p| p.1)
        .sum()
}

/// Adds the postings on days `from..=to` into `out` and returns their sum.
fn add_range(postings: &[Posting], from: u32, to: u32, out: &mut [u64]) -> u64 {
    let start = postings.partition_point(|p| p.0 < from);
    let mut total = 0;
    for (day, count) in postings[start..].iter().take_while(|p| p.0 <= to) {
        out[(day - from) as usize] += count;
        total += count;
    }
    total
}

impl CorpusIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let mut builder = IndexBuilder::new();
        for t in corpus.tables() {
            builder.add_table(t);
        }
        builder.finish()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.first
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        let first = self.first?;
        Some(first + Duration::days(self.token_totals.len() as i64 - 1))
    }

    pub fn days(&self) -> usize {
        self.token_totals.len()
    }

    pub fn type_count(&self) -> usize {
        self.forms.len()
    }

    pub fn token_total(&self) -> u64 {
        self.token_totals.iter().sum()
    }

    /// Day offsets of `from..=to` clipped to the indexed span, if they overlap.
    pub fn day_range(&self, from: NaiveDate, to: NaiveDate) -> Option<(u32, u32)> {
        let (first, last) = (self.first_date()?, self.last_date()?);
        let from = from.max(first);
        let to = to.min(last);
        if from > to {
            return None;
        }
        Some(((from - first).num_days() as u32, (to - first).num_days() as u32))
    }

    pub fn date_of(&self, day: u32) -> NaiveDate {
        self.first.expect("non-empty index") + Duration::days(day as i64)
    }

    pub fn token_totals(&self, from: u32, to: u32) -> &[u64] {
        &self.token_totals[from as usize..=to as usize]
    }

    pub fn bigram_totals(&self, from: u32, to: u32) -> &[u64] {
        &self.bigram_totals[from as usize..=to as usize]
    }

    pub fn form_id(&self, form: &str) -> Option<u32> {
        self.form_ids.get(form).copied()
    }

    pub fn form(&self, id: u32) -> &str {
        &self.forms[id as usize]
    }

    /// Sort key that orders form ids like their strings.
    pub fn form_rank(&self, id: u32) -> u32 {
        self.form_ranks[id as usize]
    }

    /// Ids of every form containing `pattern` as a substring.
    pub fn forms_containing(&self, pattern: &str) -> Vec<u32> {
        self.forms
            .iter()
            .enumerate()
            .filter(|(_, f)| f.contains(pattern))
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Daily counts of one form over `from..=to`.
    pub fn unigram_counts(&self, form: u32, from: u32, to: u32) -> Vec<u64> {
        let mut out = vec![0; (to - from + 1) as usize];
        add_range(self.unigram_postings.get(form), from, to, &mut out);
        out
    }

    /// Adds the daily counts of `form` into `out` (indexed from `from`) and
    /// returns their sum.
    pub fn add_unigram_counts(&self, form: u32, from: u32, to: u32, out: &mut [u64]) -> u64 {
        add_range(self.unigram_postings.get(form), from, to, out)
    }

    pub fn unigram_total(&self, form: u32, from: u32, to: u32) -> u64 {
        sum_range(self.unigram_postings.get(form), from, to)
    }

    pub fn bigram_id(&self, first: &str, second: &str) -> Option<u32> {
        let key = (self.form_id(first)?, self.form_id(second)?);
        self.bigram_ids.get(&key).copied()
    }

    pub fn bigram_counts(&self, bigram: u32, from: u32, to: u32) -> Vec<u64> {
        let mut out = vec![0; (to - from + 1) as usize];
        add_range(self.bigram_postings.get(bigram), from, to, &mut out);
        out
    }

    pub fn bigram_total(&self, bigram: u32, from: u32, to: u32) -> u64 {
        sum_range(self.bigram_postings.get(bigram), from, to)
    }

    /// All bigram ids with their `(first, second)` form ids.
    pub fn bigrams(&self) -> impl Iterator<Item = (u32, (u32, u32))> + '_ {
        self.bigram_keys.iter().enumerate().map(|(i, k)| (i as u32, *k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, day).unwrap()
    }

    fn index() -> CorpusIndex {
        let mut b = IndexBuilder::new();
        b.add_day(d(1), [("a", 2), ("b", 1)], [(("a", "b"), 1)]);
        b.add_day(d(3), [("a", 5)], [(("a", "a"), 4)]);
        b.finish()
    }

    #[test]
    fn gaps_become_empty_days() {
        let idx = index();
        assert_eq!(idx.days(), 3);
        assert_eq!(idx.last_date(), Some(d(3)));
        assert_eq!(idx.token_totals(0, 2), [3, 0, 5]);
        assert_eq!(idx.bigram_totals(0, 2), [1, 0, 4]);
    }

    #[test]
    fn counts_over_ranges() {
        let idx = index();
        let a = idx.form_id("a").unwrap();
        assert_eq!(idx.unigram_counts(a, 0, 2), [2, 0, 5]);
        assert_eq!(idx.unigram_counts(a, 1, 2), [0, 5]);
        assert_eq!(idx.unigram_total(a, 0, 1), 2);
        let aa = idx.bigram_id("a", "a").unwrap();
        assert_eq!(idx.bigram_counts(aa, 0, 2), [0, 0, 4]);
        assert!(idx.bigram_id("b", "a").is_none());
    }

    #[test]
    fn range_clipping() {
        let idx = index();
        assert_eq!(idx.day_range(d(2), d(30)), Some((1, 2)));
        assert_eq!(idx.day_range(d(4), d(30)), None);
        assert_eq!(idx.day_range(d(3), d(1)), None);
    }

    #[test]
    #[should_panic(expected = "increasing order")]
    fn days_must_increase() {
        let mut b = IndexBuilder::new();
        b.add_day(d(2), [("a", 1)], []);
        b.add_day(d(1), [("a", 1)], []);
    }
}
