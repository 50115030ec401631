//! Accuracy, ROC curves and AUC.
//!
//! The ROC curve is swept over every distinct score (ties grouped into one
//! point) from the highest threshold down, so it always starts at (0,0) and
//! ends at (1,1). AUC is the trapezoidal area under that curve, which equals
//! the pairwise rank statistic (probability that a random positive outscores
//! a random negative, ties counting one half); the test suites cross-check
//! the two computations against each other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A score (probability or decision value) with its ground-truth label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction {
    pub id: String,
    pub score: f64,
    pub label: u8,
}

/// Fraction of exact matches between predicted and true labels.
pub fn accuracy(preds: &[(u8, u8)]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::EmptyInput {
            metric: "accuracy".to_string(),
        });
    }
    let correct = preds.iter().filter(|(p, t)| p == t).count();
    Ok(correct as f64 / preds.len() as f64)
}

fn class_counts(preds: &[ScoredPrediction], metric: &str) -> Result<(usize, usize)> {
    if preds.iter().any(|p| !p.score.is_finite()) {
        return Err(Error::InvalidConfig {
            message: format!("{metric}: non-finite score"),
        });
    }
    let positives = preds.iter().filter(|p| p.label == 1).count();
    let negatives = preds.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass {
            metric: metric.to_string(),
        });
    }
    Ok((positives, negatives))
}

/// ROC points as (false-positive rate, true-positive rate), one per distinct
/// score, descending threshold, with the (0,0) endpoint prepended.
pub fn roc_curve(preds: &[ScoredPrediction]) -> Result<Vec<(f64, f64)>> {
    let (positives, negatives) = class_counts(preds, "roc_curve")?;

    let mut sorted: Vec<(f64, u8)> = preds.iter().map(|p| (p.score, p.label)).collect();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores are finite"));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    Ok(points)
}

/// Trapezoidal area under the ROC curve.
pub fn auc(preds: &[ScoredPrediction]) -> Result<f64> {
    let curve = roc_curve(preds)?;
    let mut area = 0.0;
    for pair in curve.windows(2) {
        let (x1, y1) = pair[0];
        let (x2, y2) = pair[1];
        area += (x2 - x1) * (y1 + y2) / 2.0;
    }
    Ok(area)
}

/// ROC points as a `fpr,tpr` CSV document.
pub fn roc_to_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in points {
        out.push_str(&format!("{fpr},{tpr}\n"));
    }
    out
}

/// One row of an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub method: String,
    pub accuracy: f64,
    pub auc: f64,
    pub roc: Vec<(f64, f64)>,
}
