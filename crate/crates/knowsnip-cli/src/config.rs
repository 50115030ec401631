//! Flat key-value run configuration.
//!
//! A config file holds one `key = value` pair per line (`#` comments and
//! blank lines allowed). Command-line flags override file values, which
//! override the built-in defaults. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use knowsnip::netops::Pooling;

pub const KNOWN_KEYS: &[&str] = &[
    "embed_dim",
    "cnn1_kernels",
    "cnn1_width",
    "min_sentence_tokens",
    "cnn2_kernels",
    "cnn2_width",
    "dense_nodes",
    "pooling",
    "learning_rate",
    "batch_size",
    "epochs",
    "seed",
    "train_fraction",
    "pos_k",
    "window_t",
    "svm_c",
    "top_k",
    "domains",
    "docs_per_domain",
    "vocab_size",
    "embed_range",
    "knowledgeable_fraction",
];

/// Parsed but untyped configuration values.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`, found {raw:?}", path.display(), idx + 1);
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("{}:{}: unknown config key {key:?}", path.display(), idx + 1);
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                bail!("{}:{}: duplicate config key {key:?}", path.display(), idx + 1);
            }
        }
        Ok(RunConfig { values })
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key}: bad value {raw:?}: {e}"),
            },
        }
    }

    /// flag > config file > default.
    pub fn usize(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize> {
        Ok(flag.or(self.parsed(key)?).unwrap_or(default))
    }

    pub fn f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        Ok(flag.or(self.parsed(key)?).unwrap_or(default))
    }

    pub fn u64(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        Ok(flag.or(self.parsed(key)?).unwrap_or(default))
    }

    pub fn pooling(&self, flag: Option<String>, default: Pooling) -> Result<Pooling> {
        let raw = match (flag, self.values.get("pooling")) {
            (Some(f), _) => f,
            (None, Some(v)) => v.clone(),
            (None, None) => return Ok(default),
        };
        match raw.as_str() {
            "average" | "avg" => Ok(Pooling::Average),
            "max1" | "max" => Ok(Pooling::Max1),
            other => bail!("pooling must be `average` or `max1`, got {other:?}"),
        }
    }
}
