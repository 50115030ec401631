//! Linear hinge-loss SVM trained by deterministic subgradient descent.
//!
//! The objective is `(1/2) ||w||^2 + c * sum_i max(0, 1 - y_i (w.x_i + b))`
//! with labels in {-1, +1}. Training runs a fixed `20 * N` full-batch
//! subgradient steps on the equivalent `1/(c N)`-scaled objective with step
//! `1 / (lambda * t)`, `lambda = 1 / (c * N)`, and returns the average of
//! all iterates. The bias rides along in the hinge term but is not
//! regularized; its full-batch subgradient is a class-balanced mean, so it
//! stays tame where a single-sample variant would thrash it by `c * N`
//! early on.
//!
//! Subgradient descent is scale-sensitive, so features are standardized
//! (train-split statistics) before training; [`TrainedSvm`] couples the
//! standardizer with the weights so prediction applies the same transform.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Weights of a trained linear SVM over standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Hinge penalty coefficient the model was trained with.
    pub c: f64,
}

impl LinearSvm {
    /// Decision value `w.x + b`; the label is its sign, the magnitude feeds
    /// ROC curves.
    pub fn decision(&self, features: &[f64]) -> f64 {
        debug_assert_eq!(features.len(), self.weights.len());
        self.weights
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }
}

/// Label = 1 iff the decision value is strictly positive.
pub fn svm_predict(model: &LinearSvm, features: &[f64]) -> u8 {
    u8::from(model.decision(features) > 0.0)
}

/// The training objective: `(1/2)||w||^2 + c * sum hinge`.
pub fn hinge_objective(model: &LinearSvm, features: &[Vec<f64>], labels: &[u8]) -> f64 {
    let reg = 0.5 * model.weights.iter().map(|w| w * w).sum::<f64>();
    let hinge: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let signed = 2.0 * f64::from(y) - 1.0;
            (1.0 - signed * model.decision(x)).max(0.0)
        })
        .sum();
    reg + model.c * hinge
}

/// Trains on (already standardized) features. Needs at least one example of
/// each class.
///
/// The solver is full-batch and therefore deterministic outright; `seed` is
/// accepted for interface stability and does not influence the result.
pub fn svm_train(features: &[Vec<f64>], labels: &[u8], c: f64, seed: u64) -> Result<LinearSvm> {
    Ok(svm_train_traced(features, labels, c, seed)?.0)
}

/// As [`svm_train`], also returning the objective of the running averaged
/// iterate sampled every `N` iterations (20 values).
pub fn svm_train_traced(
    features: &[Vec<f64>],
    labels: &[u8],
    c: f64,
    _seed: u64,
) -> Result<(LinearSvm, Vec<f64>)> {
    let n = features.len();
    if n == 0 || labels.len() != n {
        return Err(Error::InvalidConfig {
            message: "features and labels must be non-empty and aligned".to_string(),
        });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidConfig {
            message: format!("penalty coefficient must be > 0, got {c}"),
        });
    }
    let dim = features[0].len();
    if dim == 0 || features.iter().any(|f| f.len() != dim) {
        return Err(Error::ShapeMismatch {
            message: "feature rows must share one nonzero dimension".to_string(),
        });
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass {
            metric: "svm_train".to_string(),
        });
    }

    let count = n as f64;
    let lambda = 1.0 / (c * count);
    let total = 20 * n;

    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_sum = vec![0.0f64; dim];
    let mut b_sum = 0.0f64;
    let mut trace = Vec::with_capacity(20);

    for t in 1..=total {
        // mean hinge subgradient over the batch
        let mut grad_w = vec![0.0f64; dim];
        let mut grad_b = 0.0f64;
        for (x, &y) in features.iter().zip(labels) {
            let signed = 2.0 * f64::from(y) - 1.0;
            let margin = signed * (w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b);
            if margin < 1.0 {
                for (g, xj) in grad_w.iter_mut().zip(x) {
                    *g -= signed * xj / count;
                }
                grad_b -= signed / count;
            }
        }

        let eta = 1.0 / (lambda * t as f64);
        let shrink = 1.0 - eta * lambda; // = 1 - 1/t
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj = *wj * shrink - eta * g;
        }
        b -= eta * grad_b;

        for (s, wj) in w_sum.iter_mut().zip(&w) {
            *s += *wj;
        }
        b_sum += b;

        if t % n == 0 {
            let averaged = LinearSvm {
                weights: w_sum.iter().map(|s| s / t as f64).collect(),
                bias: b_sum / t as f64,
                c,
            };
            trace.push(hinge_objective(&averaged, features, labels));
        }
    }

    Ok((
        LinearSvm {
            weights: w_sum.into_iter().map(|s| s / total as f64).collect(),
            bias: b_sum / total as f64,
            c,
        },
        trace,
    ))
}

/// Per-feature standardization to zero mean, unit variance. Constant
/// features keep a unit divisor so they transform to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "cannot standardize an empty set");
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for row in rows {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        let mut stds = vec![0.0; dim];
        for row in rows {
            for ((s, x), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        for s in stds.iter_mut() {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// A linear SVM together with the standardization it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedSvm {
    pub linear: LinearSvm,
    pub scaler: Standardizer,
}

impl TrainedSvm {
    /// Trains on raw features: fits the standardizer, standardizes, trains.
    pub fn fit(features: &[Vec<f64>], labels: &[u8], c: f64, seed: u64) -> Result<Self> {
        let scaler = Standardizer::fit(features);
        let linear = svm_train(&scaler.transform_all(features), labels, c, seed)?;
        Ok(TrainedSvm { linear, scaler })
    }

    pub fn decision(&self, raw_features: &[f64]) -> f64 {
        self.linear.decision(&self.scaler.transform(raw_features))
    }

    pub fn predict(&self, raw_features: &[f64]) -> u8 {
        u8::from(self.decision(raw_features) > 0.0)
    }
}

const MODEL_VERSION: u32 = 1;

/// Versioned text model file: dimension, penalty, bias, weights and the
/// standardization statistics. `{}`-formatted f64 round-trips exactly.
pub fn save_svm(model: &TrainedSvm, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let join = |values: &[f64]| {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let text = format!(
        "SVMMODEL {MODEL_VERSION}\ndim {}\nc {}\nbias {}\nweights {}\nmeans {}\nstds {}\n",
        model.linear.weights.len(),
        model.linear.c,
        model.linear.bias,
        join(&model.linear.weights),
        join(&model.scaler.means),
        join(&model.scaler.stds),
    );
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_svm(path: impl AsRef<Path>) -> Result<TrainedSvm> {
    let path = path.as_ref();
    let fail = |message: String| Error::ModelFile {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();

    let header = lines.next().ok_or_else(|| fail("empty file".to_string()))?;
    let version: u32 = header
        .strip_prefix("SVMMODEL ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| fail(format!("bad header {header:?}")))?;
    if version != MODEL_VERSION {
        return Err(fail(format!(
            "version {version} unsupported (expected {MODEL_VERSION})"
        )));
    }

    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| fail(format!("missing field {name}")))?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' ').or(Some(rest).filter(|r| r.is_empty())))
            .map(str::to_string)
            .ok_or_else(|| fail(format!("expected field {name}, found {line:?}")))
    };
    let parse_vec = |raw: &str, name: &str| -> Result<Vec<f64>> {
        raw.split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|e| fail(format!("bad {name} value {v:?}: {e}"))))
            .collect()
    };

    let dim: usize = field("dim")?
        .parse()
        .map_err(|e| fail(format!("bad dim: {e}")))?;
    let c: f64 = field("c")?.parse().map_err(|e| fail(format!("bad c: {e}")))?;
    let bias: f64 = field("bias")?
        .parse()
        .map_err(|e| fail(format!("bad bias: {e}")))?;
    let weights = parse_vec(&field("weights")?, "weights")?;
    let means = parse_vec(&field("means")?, "means")?;
    let stds = parse_vec(&field("stds")?, "stds")?;
    if weights.len() != dim || means.len() != dim || stds.len() != dim {
        return Err(fail(format!(
            "declared dim {dim} but found {} weights, {} means, {} stds",
            weights.len(),
            means.len(),
            stds.len()
        )));
    }
    Ok(TrainedSvm {
        linear: LinearSvm { weights, bias, c },
        scaler: Standardizer { means, stds },
    })
}
