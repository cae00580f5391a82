//! Text normalization: markup stripping and word-form tokenization.
//!
//! Titles and descriptions are turned into sequences of lowercase word forms.
//! Punctuation and symbols are removed except for hyphens inside compounds,
//! digit-only forms and YouTube links are dropped, and a configurable list of
//! source-specific boilerplate forms is excluded.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Word forms removed by default. These are bylines and site names that
/// individual outlets inject into nearly every item.
pub const DEFAULT_EXCLUSIONS: [&str; 12] = [
    "t-onlinede-redakteurin",
    "t-onlinede-redakteur",
    "sport-live-blog",
    "t-onlinede",
    "focus-online-redakteurin",
    "focus-online-redakteur",
    "focus-online-reporter",
    "spiegel-titelstory",
    "faz-sprinter",
    "heise",
    "derstandardat",
    "km/h",
];

static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[^>]*>").unwrap());
static NON_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[^\p{L}\p{M}\p{N}-]").unwrap());

#[derive(Debug, thiserror::Error)]
pub enum ExclusionListError {
    #[error("reading exclusion list {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("exclusion list line {line}: entry {entry:?} is not lowercase")]
    NotLowercase { line: usize, entry: String },
    #[error("exclusion list line {line}: entry {entry:?} contains whitespace")]
    Whitespace { line: usize, entry: String },
}

/// Literal word forms deleted from token streams. Entries have no pattern
/// semantics; a token is excluded only when it equals an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionList {
    literals: BTreeSet<String>,
}

impl Default for ExclusionList {
    fn default() -> Self {
        Self {
            literals: DEFAULT_EXCLUSIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ExclusionList {
    pub fn empty() -> Self {
        Self {
            literals: BTreeSet::new(),
        }
    }

    /// Parses the one-literal-per-line format. Blank lines and lines starting
    /// with `#` are ignored; surrounding whitespace is trimmed.
    pub fn parse(text: &str) -> Result<Self, ExclusionListError> {
        let mut literals = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let entry = raw.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            if entry.chars().any(char::is_whitespace) {
                return Err(ExclusionListError::Whitespace {
                    line: idx + 1,
                    entry: entry.to_string(),
                });
            }
            if lowercase(entry) != entry {
                return Err(ExclusionListError::NotLowercase {
                    line: idx + 1,
                    entry: entry.to_string(),
                });
            }
            literals.insert(entry.to_string());
        }
        Ok(Self { literals })
    }

    pub fn load(path: &Path) -> Result<Self, ExclusionListError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExclusionListError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn contains(&self, form: &str) -> bool {
        self.literals.contains(form)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.literals.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

/// Which part of a feed item a token sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextUnit {
    Title,
    Description,
}

/// Normalized word forms of one title or description, in text order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub unit: TextUnit,
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(unit: TextUnit, tokens: Vec<String>) -> Self {
        Self { unit, tokens }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

/// Removes HTML/XML tags, decodes character entities and collapses
/// whitespace runs into single spaces.
pub fn strip_markup(text: &str) -> String {
    let untagged = TAG.replace_all(text, "");
    let decoded = html_escape::decode_html_entities(&untagged);
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Per-character simple lowercase mapping. `ß` stays `ß`, and `İ` maps to
/// `i` rather than `i` plus a combining dot.
pub fn lowercase(text: &str) -> String {
    text.chars()
        .map(|c| c.to_lowercase().next().unwrap_or(c))
        .collect()
}

fn is_youtube_link(token: &str) -> bool {
    token.contains("youtube.com") || token.contains("youtu.be")
}

fn is_digit_only(token: &str) -> bool {
    token.chars().all(char::is_numeric)
}

/// Tokenizes markup-free text into normalized word forms.
///
/// Exclusion literals are matched on the raw lowercased word and again on
/// the cleaned form.
pub fn tokenize(text: &str, exclusions: &ExclusionList) -> Vec<String> {
    let lowered = lowercase(text);
    lowered
        .split_whitespace()
        .filter(|word| !is_youtube_link(word))
        .filter(|word| !exclusions.contains(word))
        .filter_map(|word| {
            let cleaned = NON_WORD.replace_all(word, "");
            let trimmed = cleaned.trim_matches('-');
            if trimmed.is_empty() || is_digit_only(trimmed) || exclusions.contains(trimmed) {
                None
            } else {
                Some(trimmed.to_string())
            }
        })
        .collect()
}

/// Full pipeline for one raw feed text: markup stripping then tokenization.
pub fn normalize_text(raw: &str, unit: TextUnit, exclusions: &ExclusionList) -> TokenSequence {
    TokenSequence::new(unit, tokenize(&strip_markup(raw), exclusions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text, &ExclusionList::default())
    }

    #[test]
    fn strips_tags() {
        assert_eq!(strip_markup("<b>Corona</b>-Krise"), "Corona-Krise");
    }

    #[test]
    fn decodes_entities() {
        assert_eq!(strip_markup("Ticker &amp; News"), "Ticker & News");
        assert_eq!(strip_markup("Stra&#223;e &#228;rger"), "Straße ärger");
        assert_eq!(strip_markup("&Uuml;bung"), "Übung");
    }

    #[test]
    fn collapses_whitespace_around_removed_tags() {
        assert_eq!(strip_markup("a <br/> b"), "a b");
        assert_eq!(strip_markup("  <p>eins\n\tzwei</p>  "), "eins zwei");
    }

    #[test]
    fn malformed_markup_is_removed_best_effort() {
        assert_eq!(strip_markup("vor <a href='x' nach"), "vor <a href='x' nach");
        assert_eq!(strip_markup("<img src=x>>Text"), ">Text");
    }

    #[test]
    fn tokenizes_headline() {
        assert_eq!(toks("Die Corona-Krise: was nun?"), ["die", "corona-krise", "was", "nun"]);
    }

    #[test]
    fn drops_digits_and_km_h() {
        assert_eq!(toks("120 km/h auf der A8!"), ["auf", "der", "a8"]);
    }

    #[test]
    fn hyphen_only_input_is_empty() {
        assert!(toks("---").is_empty());
        assert!(toks("").is_empty());
    }

    #[test]
    fn exclusion_applies_after_lowercasing() {
        assert_eq!(toks("FAZ-Sprinter startet"), ["startet"]);
    }

    #[test]
    fn exclusion_applies_after_punctuation_removal() {
        assert_eq!(toks("Mehr bei t-online.de und heise: Neues"), ["mehr", "bei", "und", "neues"]);
        assert_eq!(toks("derstandard.at berichtet"), ["berichtet"]);
    }

    #[test]
    fn drops_youtube_links() {
        assert_eq!(
            toks("Video: https://www.youtube.com/watch?v=abc youtu.be/xyz hier"),
            ["video", "hier"]
        );
    }

    #[test]
    fn keeps_eszett_and_umlauts() {
        assert_eq!(toks("STRAßE Größe ÜBER"), ["straße", "größe", "über"]);
    }

    #[test]
    fn dotted_capital_i_uses_simple_mapping() {
        assert_eq!(toks("İstanbul"), ["istanbul"]);
    }

    #[test]
    fn symbols_are_removed() {
        assert_eq!(toks("„Zitat“ 5€ §12 «x» 100%"), ["zitat", "x"]);
        assert_eq!(toks("--corona-- ‚a‘"), ["corona", "a"]);
    }

    #[test]
    fn combining_marks_survive() {
        let decomposed = "Mu\u{0308}ller";
        assert_eq!(toks(decomposed), ["mu\u{0308}ller"]);
    }

    #[test]
    fn parses_exclusion_file() {
        let list = ExclusionList::parse("# comment\n\nheise\n  faz-sprinter  \n").unwrap();
        assert_eq!(list.len(), 2);
        assert!(list.contains("heise"));
        assert!(ExclusionList::parse("Heise\n").is_err());
        assert!(ExclusionList::parse("zwei worte\n").is_err());
    }

    #[test]
    fn default_list_matches_bundled_file() {
        let file = include_str!("../../../config/exclusions.txt");
        assert_eq!(ExclusionList::parse(file).unwrap(), ExclusionList::default());
    }

    fn has_symbol_or_punct(t: &str) -> bool {
        static PS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]").unwrap());
        PS.find_iter(t).any(|m| m.as_str() != "-")
    }

    proptest! {
        #[test]
        fn output_alphabet(text in "\\PC{0,80}") {
            let list = ExclusionList::default();
            for t in tokenize(&text, &list) {
                prop_assert!(!t.is_empty());
                prop_assert!(!has_symbol_or_punct(&t), "{t:?}");
                prop_assert_eq!(lowercase(&t), t.clone());
                prop_assert!(!t.starts_with('-') && !t.ends_with('-'));
                prop_assert!(!is_digit_only(&t));
                prop_assert!(!list.contains(&t));
                prop_assert!(!is_youtube_link(&t));
            }
        }

        #[test]
        fn idempotent(text in "[a-zA-ZäöüÄÖÜß0-9 .,:;!?/\\-]{0,80}") {
            let list = ExclusionList::default();
            let once = tokenize(&text, &list);
            let twice = tokenize(&once.join(" "), &list);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn order_preserved(words in proptest::collection::vec("[a-z]{1,6}", 0..12)) {
            let list = ExclusionList::empty();
            prop_assert_eq!(tokenize(&words.join(" "), &list), words);
        }
    }
}
