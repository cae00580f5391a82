use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::NaiveDate;

use super::table::{CorpusItem, DailyTable};
use crate::ingest::ArchiveRecord;
use crate::normalize::{normalize_text, ExclusionList, TextUnit};

impl CorpusItem {
    pub fn from_record(record: &ArchiveRecord, exclusions: &ExclusionList) -> Self {
        Self {
            source_id: record.source_id.clone(),
            date: record.date,
            title: normalize_text(&record.title, TextUnit::Title, exclusions),
            description: normalize_text(&record.description, TextUnit::Description, exclusions),
        }
    }
}

/// Daily tables for a contiguous run of calendar days. Days without any
/// items between the first and last day are present as empty tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    tables: BTreeMap<NaiveDate, DailyTable>,
    sources: BTreeSet<String>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Normalizes archived items in archive order and counts them.
    pub fn from_records<'a>(
        records: impl IntoIterator<Item = &'a ArchiveRecord>,
        exclusions: &ExclusionList,
    ) -> Self {
        let mut corpus = Self::new();
        for record in records {
            corpus.add_item(&CorpusItem::from_record(record, exclusions));
        }
        corpus.fill_gaps();
        corpus
    }

    pub fn from_tables(tables: impl IntoIterator<Item = DailyTable>) -> Self {
        let mut corpus = Self {
            tables: tables.into_iter().map(|t| (t.date(), t)).collect(),
            sources: BTreeSet::new(),
        };
        corpus.fill_gaps();
        corpus
    }

    pub fn add_item(&mut self, item: &CorpusItem) {
        self.sources.insert(item.source_id.clone());
        self.tables
            .entry(item.date)
            .or_insert_with(|| DailyTable::new(item.date))
            .add_item(item)
            .expect("table keyed by item date");
    }

    fn fill_gaps(&mut self) {
        let (Some(first), Some(last)) = (self.first_date(), self.last_date()) else {
            return;
        };
        for day in first.iter_days().take_while(|d| *d <= last) {
            self.tables.entry(day).or_insert_with(|| DailyTable::new(day));
        }
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.tables.keys().next().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.tables.keys().next_back().copied()
    }

    pub fn get(&self, date: NaiveDate) -> Option<&DailyTable> {
        self.tables.get(&date)
    }

    pub fn tables(&self) -> impl DoubleEndedIterator<Item = &DailyTable> + ExactSizeIterator {
        self.tables.values()
    }

    /// Tables for the days in `from..=to` that exist in the corpus.
    pub fn range(&self, from: NaiveDate, to: NaiveDate) -> impl Iterator<Item = &DailyTable> {
        let upper = if from <= to { to } else { from };
        self.tables.range(from..=upper).map(|(_, t)| t).filter(move |_| from <= to)
    }

    pub fn days(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_total() == 0
    }

    pub fn token_total(&self) -> u64 {
        self.tables.values().map(DailyTable::token_total).sum()
    }

    /// Distinct word forms over the whole corpus.
    pub fn type_total(&self) -> usize {
        let mut forms: HashSet<&str> = HashSet::new();
        for t in self.tables.values() {
            forms.extend(t.unigrams().keys().map(String::as_str));
        }
        forms.len()
    }

    /// Source ids seen while building from items; empty for loaded corpora.
    pub fn sources(&self) -> &BTreeSet<String> {
        &self.sources
    }

    /// The corpus cut off after `last`.
    pub fn until(&self, last: NaiveDate) -> Self {
        Self {
            tables: self
                .tables
                .range(..=last)
                .map(|(d, t)| (*d, t.clone()))
                .collect(),
            sources: self.sources.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn rec(day: u32, title: &str, desc: &str) -> ArchiveRecord {
        ArchiveRecord {
            source_id: "s".into(),
            date: NaiveDate::from_ymd_opt(2020, 1, day).unwrap(),
            title: title.into(),
            description: desc.into(),
            link: String::new(),
            fetched_at: Utc.with_ymd_and_hms(2020, 1, day, 12, 0, 0).unwrap(),
        }
    }

    #[test]
    fn gaps_are_filled_with_empty_days() {
        let records = [rec(1, "Eins zwei", ""), rec(4, "Drei", "<b>vier</b>")];
        let corpus = Corpus::from_records(&records, &ExclusionList::default());
        assert_eq!(corpus.days(), 4);
        let jan2 = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
        assert!(corpus.get(jan2).unwrap().is_empty());
        assert_eq!(corpus.token_total(), 4);
        assert_eq!(corpus.type_total(), 4);
    }

    #[test]
    fn stream_order_is_archive_order_title_first() {
        let records = [rec(1, "b a", "c"), rec(1, "d", "e f")];
        let corpus = Corpus::from_records(&records, &ExclusionList::default());
        let day = corpus.first_date().unwrap();
        assert_eq!(corpus.get(day).unwrap().token_order(), ["b", "a", "c", "d", "e", "f"]);
    }

    #[test]
    fn range_and_until() {
        let records = [rec(1, "a", ""), rec(2, "b", ""), rec(3, "c", "")];
        let corpus = Corpus::from_records(&records, &ExclusionList::default());
        let d = |n| NaiveDate::from_ymd_opt(2020, 1, n).unwrap();
        assert_eq!(corpus.range(d(2), d(9)).count(), 2);
        assert_eq!(corpus.range(d(3), d(2)).count(), 0);
        assert_eq!(corpus.until(d(2)).days(), 2);
    }
}
