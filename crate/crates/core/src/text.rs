//! Tokenization shared by the stem index, cohesion scoring and document
//! linking.

use std::collections::{BTreeMap, HashSet};

use crate::stem::porter_stem;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Lowercases, splits on anything that is not alphanumeric, drops
/// stopwords and stems what remains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analyzer {
    stopwords: HashSet<String>,
}

impl Default for Analyzer {
    fn default() -> Self {
        Self::with_stopwords(DEFAULT_STOPWORDS)
    }
}

impl Analyzer {
    /// Stopword file: one word per line, `#` comments.
    pub fn with_stopwords(list: &str) -> Self {
        let stopwords = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { stopwords }
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn stems(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .filter(|w| !self.stopwords.contains(w))
            .map(|w| porter_stem(&w))
            .collect()
    }

    /// Stem frequencies of a text.
    pub fn term_counts(&self, text: &str) -> BTreeMap<String, u32> {
        let mut counts = BTreeMap::new();
        for s in self.stems(text) {
            *counts.entry(s).or_insert(0) += 1;
        }
        counts
    }
}

/// Cosine similarity of two sparse count vectors; 0 when either is empty.
pub fn cosine(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(t, &x)| b.get(t).map(|&y| f64::from(x) * f64::from(y)))
        .sum();
    let norm = |v: &BTreeMap<String, u32>| {
        v.values().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
    };
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_skip_stopwords_and_punctuation() {
        let a = Analyzer::default();
        assert_eq!(a.stems("I propose we add the Printers!"), ["propos", "add", "printer"]);
        assert!(a.stems("").is_empty());
    }

    #[test]
    fn cosine_bounds() {
        let a = Analyzer::default();
        let x = a.term_counts("vendor printers vendor");
        assert!((cosine(&x, &x) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&x, &a.term_counts("training budget")), 0.0);
        assert_eq!(cosine(&x, &BTreeMap::new()), 0.0);
    }
}
