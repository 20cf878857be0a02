//! String similarity features, all in `[0, 1]` and symmetric.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Exact,
    #[serde(alias = "levenshtein_norm")]
    Levenshtein,
    #[serde(alias = "jaccard_tokens")]
    Jaccard,
    #[serde(alias = "cosine_tokens")]
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityOptions {
    pub lowercase: bool,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        SimilarityOptions { lowercase: true }
    }
}

/// Whitespace tokens with punctuation removed; empty tokens dropped.
pub fn tokenize(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|t| t.chars().filter(|c| !c.is_ascii_punctuation()).collect::<String>())
        .filter(|t| !t.is_empty())
        .collect()
}

fn token_counts(s: &str) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for t in tokenize(s) {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

pub fn levenshtein_norm(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

pub fn jaccard_tokens(a: &str, b: &str) -> f64 {
    let ta: std::collections::HashSet<String> = tokenize(a).into_iter().collect();
    let tb: std::collections::HashSet<String> = tokenize(b).into_iter().collect();
    let union = ta.union(&tb).count();
    if union == 0 {
        return 1.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}

pub fn cosine_tokens(a: &str, b: &str) -> f64 {
    let ca = token_counts(a);
    let cb = token_counts(b);
    if ca.is_empty() && cb.is_empty() {
        return 1.0;
    }
    if ca.is_empty() || cb.is_empty() {
        return 0.0;
    }
    let dot: usize = ca.iter().map(|(t, n)| n * cb.get(t).copied().unwrap_or(0)).sum();
    let norm = |c: &HashMap<String, usize>| (c.values().map(|n| n * n).sum::<usize>() as f64).sqrt();
    (dot as f64 / (norm(&ca) * norm(&cb))).clamp(0.0, 1.0)
}

pub fn similarity_with(opts: SimilarityOptions, feature: Feature, a: &str, b: &str) -> f64 {
    let (a, b) = if opts.lowercase { (a.to_lowercase(), b.to_lowercase()) } else { (a.to_string(), b.to_string()) };
    match feature {
        Feature::Exact => f64::from(u8::from(a == b)),
        Feature::Levenshtein => levenshtein_norm(&a, &b),
        Feature::Jaccard => jaccard_tokens(&a, &b),
        Feature::Cosine => cosine_tokens(&a, &b),
    }
}

/// Similarity with the default options (case-insensitive).
pub fn similarity(feature: Feature, a: &str, b: &str) -> f64 {
    similarity_with(SimilarityOptions::default(), feature, a, b)
}
