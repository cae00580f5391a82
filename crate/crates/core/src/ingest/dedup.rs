use std::collections::HashSet;

use sha2::{Digest, Sha256};

use super::archive::{sanitize_field, ArchiveRecord};
use super::feed::RawFeedItem;

/// Identity of a corpus item: source, title, description and link.
///
/// Fields are compared in their archived form (tabs and line breaks read as
/// single spaces), so the key set can always be rebuilt from the archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DedupKey([u8; 32]);

impl DedupKey {
    pub fn new(source_id: &str, title: &str, description: &str, link: &str) -> Self {
        let mut hasher = Sha256::new();
        for field in [source_id, title, description, link] {
            let field = sanitize_field(field);
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field.as_bytes());
        }
        let mut out = [0u8; 32];
        out.copy_from_slice(&hasher.finalize());
        Self(out)
    }

    pub fn of_item(item: &RawFeedItem) -> Self {
        Self::new(&item.source_id, &item.title, &item.description, &item.link)
    }

    pub fn of_record(record: &ArchiveRecord) -> Self {
        Self::new(&record.source_id, &record.title, &record.description, &record.link)
    }
}

/// Keys of every item accepted so far.
#[derive(Debug, Clone, Default)]
pub struct KeyStore {
    keys: HashSet<DedupKey>,
}

impl KeyStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a ArchiveRecord>) -> Self {
        Self {
            keys: records.into_iter().map(DedupKey::of_record).collect(),
        }
    }

    pub fn contains(&self, key: &DedupKey) -> bool {
        self.keys.contains(key)
    }

    /// Returns `false` if the key was already present.
    pub fn insert(&mut self, key: DedupKey) -> bool {
        self.keys.insert(key)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Keeps the items whose key is not yet in `seen`, recording their keys.
/// Order is preserved; a key repeated within `items` survives once.
pub fn dedupe(items: Vec<RawFeedItem>, seen: &mut KeyStore) -> Vec<RawFeedItem> {
    items
        .into_iter()
        .filter(|item| seen.insert(DedupKey::of_item(item)))
        .collect()
}
