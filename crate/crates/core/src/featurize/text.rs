use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::porter;

/// Splits text into terms: maximal runs of alphabetic characters,
/// lowercased. Everything else separates terms.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

impl Stoplist {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    pub fn from_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn parse(text: &str) -> Self {
        Stoplist {
            words: text
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl FromIterator<String> for Stoplist {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Stoplist {
            words: iter.into_iter().collect(),
        }
    }
}

/// Tokenize, drop stop words, stem. The shared text pipeline for features,
/// indexing and queries.
#[derive(Debug, Clone)]
pub struct Analyzer {
    stoplist: Stoplist,
}

impl Analyzer {
    pub fn new(stoplist: Stoplist) -> Self {
        Analyzer { stoplist }
    }

    pub fn stoplist(&self) -> &Stoplist {
        &self.stoplist
    }

    pub fn analyze(&self, text: &str) -> Vec<String> {
        stem_tokens(tokenize(text), &self.stoplist)
    }
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer::new(Stoplist::english())
    }
}

fn stem_tokens(tokens: Vec<String>, stoplist: &Stoplist) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stoplist.contains(t))
        .map(|t| porter::stem(&t))
        .collect()
}

/// Stop-word removal, stemming, then removal of stems seen fewer than twice
/// in the training corpus.
pub fn preprocess(
    tokens: Vec<String>,
    stoplist: &Stoplist,
    corpus_freqs: &BTreeMap<String, u64>,
) -> Vec<String> {
    stem_tokens(tokens, stoplist)
        .into_iter()
        .filter(|s| corpus_freqs.get(s).copied().unwrap_or(0) >= 2)
        .collect()
}
