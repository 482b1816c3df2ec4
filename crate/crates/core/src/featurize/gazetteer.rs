use std::collections::HashSet;
use std::path::Path;

use super::text::tokenize;

/// A flat list of location names, matched longest-first over token
/// sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    entries: HashSet<Vec<String>>,
    longest: usize,
}

const BUNDLED: &str = include_str!("../../data/gazetteer.txt");

impl Gazetteer {
    /// Countries plus a set of regions common in the archaeology literature.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    pub fn from_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn parse(text: &str) -> Self {
        text.lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Non-overlapping, case-insensitive, longest-match count of entries in
    /// `text`.
    pub fn count_matches(&self, text: &str) -> usize {
        let tokens = tokenize(text);
        let mut count = 0;
        let mut i = 0;
        while i < tokens.len() {
            let max = self.longest.min(tokens.len() - i);
            match (1..=max)
                .rev()
                .find(|&n| self.entries.contains(&tokens[i..i + n]))
            {
                Some(n) => {
                    count += 1;
                    i += n;
                }
                None => i += 1,
            }
        }
        count
    }
}

impl<'a> FromIterator<&'a str> for Gazetteer {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let entries: HashSet<Vec<String>> = iter
            .into_iter()
            .map(tokenize)
            .filter(|t| !t.is_empty())
            .collect();
        let longest = entries.iter().map(Vec::len).max().unwrap_or(0);
        Gazetteer { entries, longest }
    }
}
