use std::collections::HashMap;

use chrono::NaiveDate;

use crate::normalize::TokenSequence;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("item dated {item} added to table for {table}")]
    DateMismatch { item: NaiveDate, table: NaiveDate },
    #[error("table {date}: bigram form {form:?} missing from unigrams")]
    DanglingBigram { date: NaiveDate, form: String },
    #[error("table {date}: bigram total {bigrams} exceeds token total {tokens}")]
    TooManyBigrams { date: NaiveDate, bigrams: u64, tokens: u64 },
    #[error("table {date}: token stream has {stream} tokens, unigram counts sum to {tokens}")]
    StreamMismatch { date: NaiveDate, stream: usize, tokens: u64 },
}

/// A deduplicated, normalized feed item assigned to one calendar day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusItem {
    pub source_id: String,
    pub date: NaiveDate,
    pub title: TokenSequence,
    pub description: TokenSequence,
}

pub type Bigram = (String, String);

/// Unigram and bigram counts for one calendar day.
///
/// Bigrams are adjacent pairs within one title or one description; they
/// never span the title/description boundary or two items. The token
/// stream keeps every token in ingestion order and is only populated for
/// tables built from items or loaded together with their sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailyTable {
    date: NaiveDate,
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<Bigram, u64>,
    token_total: u64,
    bigram_total: u64,
    token_order: Vec<String>,
    sequences: u64,
}

impl DailyTable {
    pub fn new(date: NaiveDate) -> Self {
        Self {
            date,
            unigrams: HashMap::new(),
            bigrams: HashMap::new(),
            token_total: 0,
            bigram_total: 0,
            token_order: Vec::new(),
            sequences: 0,
        }
    }

    /// Rebuilds a table from persisted counts, checking its invariants.
    /// `token_order` may be empty when the stream was not loaded.
    pub fn from_counts(
        date: NaiveDate,
        unigrams: HashMap<String, u64>,
        bigrams: HashMap<Bigram, u64>,
        token_order: Vec<String>,
    ) -> Result<Self, TableError> {
        let token_total: u64 = unigrams.values().sum();
        let bigram_total: u64 = bigrams.values().sum();
        for (a, b) in bigrams.keys() {
            for form in [a, b] {
                if !unigrams.contains_key(form) {
                    return Err(TableError::DanglingBigram {
                        date,
                        form: form.clone(),
                    });
                }
            }
        }
        if bigram_total > token_total {
            return Err(TableError::TooManyBigrams {
                date,
                bigrams: bigram_total,
                tokens: token_total,
            });
        }
        if !token_order.is_empty() && token_order.len() as u64 != token_total {
            return Err(TableError::StreamMismatch {
                date,
                stream: token_order.len(),
                tokens: token_total,
            });
        }
        Ok(Self {
            date,
            unigrams,
            bigrams,
            token_total,
            bigram_total,
            token_order,
            sequences: token_total - bigram_total,
        })
    }

    /// Adds every token of both sequences and every adjacent pair within
    /// each sequence.
    pub fn add_item(&mut self, item: &CorpusItem) -> Result<(), TableError> {
        if item.date != self.date {
            return Err(TableError::DateMismatch {
                item: item.date,
                table: self.date,
            });
        }
        for seq in [&item.title, &item.description] {
            self.add_sequence(&seq.tokens);
        }
        Ok(())
    }

    fn add_sequence(&mut self, tokens: &[String]) {
        if tokens.is_empty() {
            return;
        }
        self.sequences += 1;
        for token in tokens {
            *self.unigrams.entry(token.clone()).or_insert(0) += 1;
            self.token_order.push(token.clone());
        }
        self.token_total += tokens.len() as u64;
        for pair in tokens.windows(2) {
            *self
                .bigrams
                .entry((pair[0].clone(), pair[1].clone()))
                .or_insert(0) += 1;
        }
        self.bigram_total += tokens.len() as u64 - 1;
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn unigrams(&self) -> &HashMap<String, u64> {
        &self.unigrams
    }

    pub fn bigrams(&self) -> &HashMap<Bigram, u64> {
        &self.bigrams
    }

    pub fn unigram(&self, form: &str) -> u64 {
        self.unigrams.get(form).copied().unwrap_or(0)
    }

    pub fn token_total(&self) -> u64 {
        self.token_total
    }

    pub fn bigram_total(&self) -> u64 {
        self.bigram_total
    }

    pub fn type_count(&self) -> usize {
        self.unigrams.len()
    }

    pub fn token_order(&self) -> &[String] {
        &self.token_order
    }

    /// Number of non-empty token sequences that went into the table. For a
    /// table loaded from counts this is derived as tokens minus bigrams.
    pub fn sequence_count(&self) -> u64 {
        self.sequences
    }

    pub fn is_empty(&self) -> bool {
        self.token_total == 0
    }
}
