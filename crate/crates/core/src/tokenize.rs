//! Term extraction shared by indexing and querying.

use std::collections::BTreeSet;

pub const DEFAULT_STOPWORDS: &[&str] = &["and", "in", "of", "the", "at", "with", "no", "a", "an"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn none() -> Self {
        Stopwords(BTreeSet::new())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self::from_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::from_words(DEFAULT_STOPWORDS)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Lowercases, splits on non-alphanumeric characters, drops a possessive
/// `'s` and removes stopwords. Order and multiplicity are preserved.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let mut terms = Vec::new();
    let mut current = String::new();
    // separator seen just before `current` started, and whether a word preceded it
    let mut after_apostrophe = false;
    let mut prev: Option<char> = None;
    let mut prev_prev_alnum = false;

    let flush = |current: &mut String, after_apostrophe: bool, terms: &mut Vec<String>| {
        if current.is_empty() {
            return;
        }
        let word = std::mem::take(current);
        if after_apostrophe && word == "s" {
            return;
        }
        if !stopwords.contains(&word) {
            terms.push(word);
        }
    };

    for c in text.chars() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                after_apostrophe = matches!(prev, Some(p) if is_apostrophe(p)) && prev_prev_alnum;
            }
            current.extend(c.to_lowercase());
        } else {
            flush(&mut current, after_apostrophe, &mut terms);
        }
        prev_prev_alnum = prev.is_some_and(char::is_alphanumeric);
        prev = Some(c);
    }
    flush(&mut current, after_apostrophe, &mut terms);
    terms
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_stopwords() -> Stopwords {
        Stopwords::from_words(["and", "in", "of", "the", "at", "with", "no"])
    }

    #[test]
    fn possessive_and_case() {
        assert_eq!(
            tokenize("data in computer's Algorithm", &short_stopwords()),
            ["data", "computer", "algorithm"]
        );
    }

    #[test]
    fn stopwords_removed() {
        assert_eq!(tokenize("data and space", &short_stopwords()), ["data", "space"]);
        assert!(tokenize("", &short_stopwords()).is_empty());
        assert!(tokenize("and in of", &short_stopwords()).is_empty());
    }

    #[test]
    fn keeps_multiplicity_and_digits() {
        assert_eq!(
            tokenize("16th type, 16th-type; Type", &Stopwords::none()),
            ["16th", "type", "16th", "type", "type"]
        );
    }

    #[test]
    fn only_possessive_s_is_dropped() {
        let none = Stopwords::none();
        assert_eq!(tokenize("audience\u{2019}s joy", &none), ["audience", "joy"]);
        assert_eq!(tokenize("plan s", &none), ["plan", "s"]);
        assert_eq!(tokenize("' s", &none), ["s"]);
        assert_eq!(tokenize("it's sweets", &none), ["it", "sweets"]);
    }

    #[test]
    fn stopword_file_parsing() {
        let sw = Stopwords::parse("# comment\nThe\n\n  of \n");
        assert!(sw.contains("the") && sw.contains("of"));
        assert!(!sw.contains("# comment"));
    }
}
