//! The feature-engineering baseline: a 114-slot hand-crafted feature vector
//! (POS histogram statistics, word counts, sentence statistics), TF-IDF
//! bag-of-words, and a linear hinge-loss SVM.
//!
//! Feature layout for a tagset of size `k` (2k + 16 slots; 114 at the
//! default k = 49):
//!
//! * `1..=2k` - POS histogram statistics: mean and variance of each tag's
//!   count over a sliding window, interleaved `mean_1, var_1, ..., mean_k,
//!   var_k`.
//! * `2k+1..=2k+4` - word features: conclusive words in the title, then
//!   first/second/third-person pronouns across the document.
//! * `2k+5..=2k+16` - sentence statistics: lengths, word counts, distinct
//!   words, punctuation, paragraph and sentence counts, and their averages.

mod svm;
mod tfidf;

pub use svm::{
    hinge_objective, load_svm, save_svm, svm_predict, svm_train, svm_train_traced, LinearSvm,
    Standardizer, TrainedSvm,
};
pub use tfidf::{SparseVec, TfidfVectorizer};

use std::collections::HashSet;
use std::path::Path;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::lexicons::Lexicons;

/// POS-histogram parameters: tagset size `k` and sliding-window length `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PhsfConfig {
    pub k: usize,
    pub t: usize,
}

impl Default for PhsfConfig {
    fn default() -> Self {
        PhsfConfig { k: 49, t: 15 }
    }
}

/// The assembled feature vector. `has_pos` records whether the POS block was
/// computed or zero-filled because the document carries no tags.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub has_pos: bool,
}

/// Dimension of the feature vector for a tagset of size `k`.
pub fn feature_dim(k: usize) -> usize {
    2 * k + 16
}

/// POS histogram statistics over a flat tag sequence.
///
/// A window of length `t` slides one step at a time, giving `l - t + 1`
/// windows; a document shorter than the window is treated as a single
/// window. For every tag the population mean and population variance of its
/// per-window count are emitted, interleaved.
///
/// Tags must lie in `[0, k)`.
pub fn phsf(tags: &[usize], config: &PhsfConfig) -> Vec<f64> {
    let k = config.k;
    for &tag in tags {
        assert!(tag < k, "POS tag {tag} outside tagset of size {k}");
    }
    let l = tags.len();
    let window = config.t.min(l.max(1));
    let window_count = if l >= config.t { l - config.t + 1 } else { 1 };

    let mut counts = vec![0usize; k];
    for &tag in &tags[..window.min(l)] {
        counts[tag] += 1;
    }
    let mut sums = vec![0.0f64; k];
    let mut square_sums = vec![0.0f64; k];
    for start in 0..window_count {
        if start > 0 {
            counts[tags[start - 1]] -= 1;
            counts[tags[start + window - 1]] += 1;
        }
        for j in 0..k {
            let c = counts[j] as f64;
            sums[j] += c;
            square_sums[j] += c * c;
        }
    }

    let w = window_count as f64;
    let mut out = Vec::with_capacity(2 * k);
    for j in 0..k {
        let mean = sums[j] / w;
        let variance = (square_sums[j] / w - mean * mean).max(0.0);
        out.push(mean);
        out.push(variance);
    }
    out
}

/// Word features: conclusive words in the title, then pronoun counts by
/// grammatical person over every token of the document.
pub fn word_features(doc: &Document, lexicons: &Lexicons) -> [f64; 4] {
    let conclusive = doc
        .title_tokens
        .iter()
        .filter(|t| lexicons.conclusive.contains(*t))
        .count();
    let mut persons = [0usize; 3];
    let all_tokens = doc.title_tokens.iter().chain(doc.sentences.iter().flatten());
    for token in all_tokens {
        if lexicons.first_person.contains(token) {
            persons[0] += 1;
        }
        if lexicons.second_person.contains(token) {
            persons[1] += 1;
        }
        if lexicons.third_person.contains(token) {
            persons[2] += 1;
        }
    }
    [
        conclusive as f64,
        persons[0] as f64,
        persons[1] as f64,
        persons[2] as f64,
    ]
}

/// The twelve shallow text statistics.
///
/// "Length" counts characters across tokens, "words" counts tokens,
/// punctuation matches the punctuation lexicon. A document without explicit
/// paragraph structure counts as one paragraph; averages are 0 whenever the
/// denominator is 0.
pub fn sentence_features(doc: &Document, lexicons: &Lexicons) -> [f64; 12] {
    let char_len = |tokens: &[String]| -> usize { tokens.iter().map(|t| t.chars().count()).sum() };
    let distinct = |tokens: &mut dyn Iterator<Item = &String>| -> usize {
        tokens.collect::<HashSet<_>>().len()
    };
    let punct = |tokens: &mut dyn Iterator<Item = &String>| -> usize {
        tokens.filter(|t| lexicons.punctuation.contains(*t)).count()
    };

    let title_len = char_len(&doc.title_tokens);
    let content_len: usize = doc.sentences.iter().map(|s| char_len(s)).sum();
    let title_words = doc.title_tokens.len();
    let content_words: usize = doc.sentences.iter().map(|s| s.len()).sum();
    let title_distinct = distinct(&mut doc.title_tokens.iter());
    let content_distinct = distinct(&mut doc.sentences.iter().flatten());
    let title_punct = punct(&mut doc.title_tokens.iter());
    let content_punct = punct(&mut doc.sentences.iter().flatten());

    let sentence_count = doc.sentences.len();
    let paragraph_count = if sentence_count == 0 {
        0
    } else {
        doc.paragraphs.as_ref().map_or(1, |p| p.len())
    };
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };

    [
        title_len as f64,
        content_len as f64,
        title_words as f64,
        content_words as f64,
        title_distinct as f64,
        content_distinct as f64,
        title_punct as f64,
        content_punct as f64,
        paragraph_count as f64,
        sentence_count as f64,
        ratio(sentence_count, paragraph_count),
        ratio(content_words, sentence_count),
    ]
}

/// Assembles the full feature vector: POS block (zeros when the document
/// has no tags), word features, sentence features.
pub fn extract(doc: &Document, config: &PhsfConfig, lexicons: &Lexicons) -> Result<FeatureVector> {
    let (pos_block, has_pos) = match &doc.pos_tags {
        Some(rows) => {
            let flat: Vec<usize> = rows.iter().flatten().copied().collect();
            if let Some(&bad) = flat.iter().find(|&&tag| tag >= config.k) {
                return Err(Error::InvalidDocument {
                    id: doc.id.clone(),
                    message: format!("POS tag {bad} outside tagset of size {}", config.k),
                });
            }
            (phsf(&flat, config), true)
        }
        None => (vec![0.0; 2 * config.k], false),
    };

    let mut values = pos_block;
    values.extend(word_features(doc, lexicons));
    values.extend(sentence_features(doc, lexicons));
    debug_assert_eq!(values.len(), feature_dim(config.k));
    Ok(FeatureVector { values, has_pos })
}

/// One row of a feature dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub domain: String,
    pub label: Option<u8>,
    pub features: Vec<f64>,
}

/// Extracts features for the whole corpus, in document order.
pub fn extract_corpus(
    corpus: &Corpus,
    config: &PhsfConfig,
    lexicons: &Lexicons,
) -> Result<Vec<FeatureRow>> {
    corpus
        .documents
        .iter()
        .map(|doc| {
            let fv = extract(doc, config, lexicons)?;
            Ok(FeatureRow {
                id: doc.id.clone(),
                domain: doc.domain.clone(),
                label: doc.label,
                features: fv.values,
            })
        })
        .collect()
}

/// Writes rows as CSV with header `id,domain,label,f1..fN`. Unlabeled
/// documents get an empty label field.
pub fn write_features_csv(rows: &[FeatureRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    let dim = rows.first().map_or(0, |r| r.features.len());
    let mut header = vec!["id".to_string(), "domain".to_string(), "label".to_string()];
    header.extend((1..=dim).map(|i| format!("f{i}")));
    writer.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut record = vec![
            row.id.clone(),
            row.domain.clone(),
            row.label.map_or(String::new(), |l| l.to_string()),
        ];
        record.extend(row.features.iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a feature CSV produced by [`write_features_csv`].
pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let fail = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        if record.len() < 3 {
            return Err(fail(format!("row {}: too few columns", i + 2)));
        }
        let label = match &record[2] {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            other => return Err(fail(format!("row {}: bad label {other:?}", i + 2))),
        };
        let features = record
            .iter()
            .skip(3)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| fail(format!("row {}: bad value {v:?}: {e}", i + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(FeatureRow {
            id: record[0].to_string(),
            domain: record[1].to_string(),
            label,
            features,
        });
    }
    if rows.is_empty() {
        return Err(fail("no feature rows".to_string()));
    }
    Ok(rows)
}
