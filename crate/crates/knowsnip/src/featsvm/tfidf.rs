//! TF-IDF bag-of-words vectorizer.
//!
//! Fit on the training split only: the vocabulary is every title and content
//! token, and the inverse document frequency is the smoothed
//! `ln((1 + N) / (1 + df)) + 1`, which is strictly positive. Transforming a
//! document multiplies raw term counts by idf and L2-normalizes; tokens
//! unseen at fit time contribute nothing.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::Document;

/// Sparse vector with entries sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVectorizer {
    vocabulary: HashMap<String, usize>,
    idf: Vec<f64>,
}

fn tokens_of(doc: &Document) -> impl Iterator<Item = &String> {
    doc.title_tokens.iter().chain(doc.sentences.iter().flatten())
}

impl TfidfVectorizer {
    /// Builds the vocabulary (sorted token order, so fitting is
    /// deterministic) and idf values from the given documents.
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Self {
        let docs: Vec<&Document> = docs.into_iter().collect();
        let mut vocab_set = BTreeSet::new();
        for doc in &docs {
            for token in tokens_of(doc) {
                vocab_set.insert(token.clone());
            }
        }
        let vocabulary: HashMap<String, usize> = vocab_set
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();

        let mut df = vec![0usize; vocabulary.len()];
        for doc in &docs {
            let mut seen = BTreeSet::new();
            for token in tokens_of(doc) {
                if let Some(&idx) = vocabulary.get(token) {
                    seen.insert(idx);
                }
            }
            for idx in seen {
                df[idx] += 1;
            }
        }
        let n = docs.len() as f64;
        let idf = df
            .iter()
            .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        TfidfVectorizer { vocabulary, idf }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.vocabulary.get(token).map(|&i| self.idf[i])
    }

    /// L2-normalized tf-idf of a document. Unseen tokens are ignored.
    pub fn transform(&self, doc: &Document) -> SparseVec {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for token in tokens_of(doc) {
            if let Some(&idx) = self.vocabulary.get(token) {
                *counts.entry(idx).or_insert(0.0) += 1.0;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, tf)| (i, tf * self.idf[i]))
            .collect();
        entries.sort_by_key(|&(i, _)| i);

        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut entries {
                *v /= norm;
            }
        }
        SparseVec {
            dim: self.vocabulary.len(),
            entries,
        }
    }
}
