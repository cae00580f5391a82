use serde::{Deserialize, Serialize};

use crate::normalize::lowercase;

/// Characters with a meaning in regular expressions. They are deleted from
/// user input; patterns are never interpreted as regexes.
pub const REGEX_SPECIALS: [char; 14] = [
    '\\', '^', '$', '.', '|', '?', '*', '+', '(', ')', '[', ']', '{', '}',
];

/// Deletes regex metacharacters, trims, collapses inner whitespace runs to a
/// single space and lowercases. May return an empty string.
pub fn sanitize_pattern(raw: &str) -> String {
    let kept: String = raw.chars().filter(|c| !REGEX_SPECIALS.contains(c)).collect();
    lowercase(&kept.split_whitespace().collect::<Vec<_>>().join(" "))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("pattern {0:?} has more than two words; only unigrams and bigrams are supported")]
pub struct TooManyWords(pub String);

/// A sanitized search pattern. One internal space makes a bigram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Pattern {
    Unigram { form: String },
    Bigram { first: String, second: String },
}

impl Pattern {
    /// Classifies an already sanitized, non-empty pattern.
    pub fn classify(sanitized: &str) -> Result<Self, TooManyWords> {
        let mut parts = sanitized.split(' ');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(form), None, _) => Ok(Self::Unigram {
                form: form.to_string(),
            }),
            (Some(first), Some(second), None) => Ok(Self::Bigram {
                first: first.to_string(),
                second: second.to_string(),
            }),
            _ => Err(TooManyWords(sanitized.to_string())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Unigram { form } => form.clone(),
            Self::Bigram { first, second } => format!("{first} {second}"),
        }
    }

    pub fn is_bigram(&self) -> bool {
        matches!(self, Self::Bigram { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitize_examples() {
        assert_eq!(sanitize_pattern(" ^cor(ona)$ "), "corona");
        assert_eq!(sanitize_pattern(".*"), "");
        assert_eq!(sanitize_pattern("neue  normalität"), "neue normalität");
        assert_eq!(sanitize_pattern("  Maske\t"), "maske");
        assert_eq!(sanitize_pattern("a\\b|c{2}[x]+?"), "abc2x");
        assert_eq!(sanitize_pattern("corona-krise"), "corona-krise");
    }

    #[test]
    fn classify() {
        assert_eq!(Pattern::classify("fc").unwrap(), Pattern::Unigram { form: "fc".into() });
        assert_eq!(
            Pattern::classify("neue normalität").unwrap(),
            Pattern::Bigram {
                first: "neue".into(),
                second: "normalität".into()
            }
        );
        assert!(Pattern::classify("a b c").is_err());
        assert_eq!(Pattern::classify("neue normalität").unwrap().label(), "neue normalität");
    }
}
