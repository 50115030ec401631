//! Knowledgeable-snippet scoring and extraction.
//!
//! A sentence matters to the prediction if removing it would move the
//! document away from its predicted class. That is measured without any
//! re-forwarding per sentence: predict the document, invert the prediction
//! into a pseudo-label, and differentiate the pseudo-label loss with respect
//! to a diagonal scaling of the sentence matrix. Scaling column i of `S` by
//! `c` routes the derivative through that column, so
//! `d loss / d c |_{c=1} = <grad_S[:, i], S[:, i]>` - the raw score of
//! sentence i.
//!
//! For documents predicted knowledgeable a higher raw derivative means a
//! more knowledgeable sentence; for documents predicted unknowledgeable the
//! reading inverts, so the sign-adjusted `knowledgeable_score` is comparable
//! across both outcomes.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::ssnn::SsnnModel;

/// Per-sentence saliency. Sentences skipped by the forward pass (too short)
/// keep their position but carry no scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SnippetScore {
    /// Position in the document's original sentence list.
    pub sentence_index: usize,
    pub eligible: bool,
    /// `<grad_S[:, i], S[:, i]>` of the pseudo-label loss.
    pub raw_derivative: Option<f64>,
    /// Raw derivative, sign-flipped when the document was predicted
    /// unknowledgeable.
    pub knowledgeable_score: Option<f64>,
}

/// Inner products of matching columns; the per-column derivative of a loss
/// with gradient `grad` under a diagonal scaling of `values`.
pub fn column_scores(grad: &Array2<f64>, values: &Array2<f64>, columns: usize) -> Vec<f64> {
    (0..columns)
        .map(|i| grad.column(i).dot(&values.column(i)))
        .collect()
}

/// Scores every sentence of a document.
///
/// Runs the prediction pass, builds the pseudo-label as the inverse of the
/// prediction, then differentiates the pseudo-label loss on a fresh forward
/// pass (the prediction tape is not reused). Padding columns receive no
/// score.
pub fn score_sentences(
    model: &SsnnModel,
    table: &EmbeddingTable,
    doc: &Document,
    domain_idx: usize,
) -> Result<Vec<SnippetScore>> {
    let (h, _) = model.forward(table, doc, domain_idx)?;
    let predicted = u8::from(h > 0.5);
    let pseudo_label = 1 - predicted;

    let (_, tape) = model.forward(table, doc, domain_idx)?;
    let (s_matrix, eligible, upper) = tape.into_sentence_stage();
    let grad = model.backprop_to_sentences(upper, pseudo_label)?;
    let raw = column_scores(&grad, &s_matrix, eligible.len());

    let mut scores: Vec<SnippetScore> = (0..doc.sentences.len())
        .map(|i| SnippetScore {
            sentence_index: i,
            eligible: false,
            raw_derivative: None,
            knowledgeable_score: None,
        })
        .collect();
    for (&sentence_index, &derivative) in eligible.iter().zip(&raw) {
        scores[sentence_index] = SnippetScore {
            sentence_index,
            eligible: true,
            raw_derivative: Some(derivative),
            knowledgeable_score: Some(if predicted == 1 { derivative } else { -derivative }),
        };
    }
    Ok(scores)
}

/// Indices of the `k` eligible sentences with the largest knowledgeable
/// scores, descending; ties break toward the smaller sentence index. Returns
/// all eligible sentences when there are fewer than `k`.
pub fn top_k(scores: &[SnippetScore], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidConfig {
            message: "k must be >= 1".to_string(),
        });
    }
    let mut ranked: Vec<(usize, f64)> = scores
        .iter()
        .filter_map(|s| s.knowledgeable_score.map(|score| (s.sentence_index, score)))
        .collect();
    if ranked.is_empty() {
        return Err(Error::NoEligibleScores);
    }
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(k);
    Ok(ranked.into_iter().map(|(i, _)| i).collect())
}

/// Serializable score entry of an [`Annotation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub index: usize,
    pub eligible: bool,
    pub knowledgeable_score: Option<f64>,
}

/// Prediction plus snippet extraction for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: String,
    pub domain: String,
    pub predicted_label: u8,
    pub probability: f64,
    pub scores: Vec<ScoreRecord>,
    pub top_k: Vec<usize>,
}

/// Predicts a document and extracts its top-k snippets in one record.
pub fn annotate(
    model: &SsnnModel,
    table: &EmbeddingTable,
    doc: &Document,
    domain_idx: usize,
    k: usize,
) -> Result<Annotation> {
    let (h, _) = model.forward(table, doc, domain_idx)?;
    let scores = score_sentences(model, table, doc, domain_idx)?;
    let top = top_k(&scores, k)?;
    Ok(Annotation {
        id: doc.id.clone(),
        domain: doc.domain.clone(),
        predicted_label: u8::from(h > 0.5),
        probability: h,
        scores: scores
            .iter()
            .map(|s| ScoreRecord {
                index: s.sentence_index,
                eligible: s.eligible,
                knowledgeable_score: s.knowledgeable_score,
            })
            .collect(),
        top_k: top,
    })
}
