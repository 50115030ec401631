//! Vocabulary and word-embedding lookup.
//!
//! Embeddings are frozen model inputs: they are loaded from a text file or
//! sampled once, never updated by training. A sentence embeds to a matrix
//! with one column per token, so the first axis of a convolution kernel
//! matches the embedding dimension.
//!
//! Embedding file format: first line `<vocab_count> <dim>`, then one line per
//! token, `<token> <v1> ... <vdim>` space-separated.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Token-to-vector table with a dedicated unknown-token row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: HashMap<String, usize>,
    /// `vocab.len() + 1` rows; the last row is the unknown-token vector.
    vectors: Array2<f64>,
    unk_index: usize,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vocabulary size, not counting the unknown row.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn unk_index(&self) -> usize {
        self.unk_index
    }

    /// Row for a token; out-of-vocabulary tokens map to the unknown row, so
    /// lookup is total.
    pub fn lookup(&self, token: &str) -> ArrayView1<'_, f64> {
        let row = self.vocab.get(token).copied().unwrap_or(self.unk_index);
        self.vectors.row(row)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vocab.contains_key(token)
    }
}

/// Loads a text-format embedding file and appends an unknown-token row equal
/// to the element-wise mean of all loaded vectors.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();

    let parse_err = |line: usize, message: String| Error::EmbeddingParse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".to_string()))?;
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(1, format!("bad header {header:?}")))?;
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(1, format!("bad header {header:?}")))?;
    if count == 0 || dim == 0 {
        return Err(parse_err(1, "vocab count and dim must be >= 1".to_string()));
    }

    let mut vocab = HashMap::with_capacity(count);
    let mut vectors = Array2::zeros((count + 1, dim));
    let mut loaded = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if loaded == count {
            return Err(parse_err(idx + 1, format!("more than {count} vectors")));
        }
        let mut parts = line.split_whitespace();
        let token = parts
            .next()
            .ok_or_else(|| parse_err(idx + 1, "missing token".to_string()))?;
        if vocab.insert(token.to_string(), loaded).is_some() {
            return Err(Error::DuplicateToken {
                token: token.to_string(),
            });
        }
        let values: Vec<f64> = parts
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(idx + 1, format!("bad value {s:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(parse_err(
                idx + 1,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        for (j, v) in values.into_iter().enumerate() {
            vectors[[loaded, j]] = v;
        }
        loaded += 1;
    }
    if loaded != count {
        return Err(parse_err(0, format!("header says {count} vectors, found {loaded}")));
    }

    // unknown token: element-wise mean of the vocabulary
    for j in 0..dim {
        let mean = (0..count).map(|i| vectors[[i, j]]).sum::<f64>() / count as f64;
        vectors[[count, j]] = mean;
    }

    Ok(EmbeddingTable {
        dim,
        vocab,
        vectors,
        unk_index: count,
    })
}

/// Writes a table in the text format of [`load_embeddings`]. The unknown row
/// is not written; loaders reconstruct it as the vocabulary mean.
pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut ordered: Vec<(&String, usize)> = table.vocab.iter().map(|(t, &i)| (t, i)).collect();
    ordered.sort_by_key(|&(_, i)| i);

    let mut out = String::new();
    writeln!(out, "{} {}", table.vocab_size(), table.dim).unwrap();
    for (token, row) in ordered {
        out.push_str(token);
        for v in table.vectors.row(row) {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Random table over a fixed token list, entries uniform in
/// `[-0.5/dim, 0.5/dim]` (the customary embedding initialization range).
pub fn random_embeddings(tokens: &[String], dim: usize, seed: u64) -> Result<EmbeddingTable> {
    random_embeddings_with_range(tokens, dim, seed, 0.5 / dim as f64)
}

/// Random table with entries uniform in `[-half_range, half_range]`. Larger
/// ranges (around 0.5) mimic the component scale of trained embeddings and
/// are what synthetic-corpus experiments should use, since the network never
/// updates its input vectors.
pub fn random_embeddings_with_range(
    tokens: &[String],
    dim: usize,
    seed: u64,
    half_range: f64,
) -> Result<EmbeddingTable> {
    if tokens.is_empty() || dim == 0 {
        return Err(Error::InvalidConfig {
            message: "tokens must be non-empty and dim >= 1".to_string(),
        });
    }
    let mut vocab = HashMap::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        if vocab.insert(token.clone(), i).is_some() {
            return Err(Error::DuplicateToken {
                token: token.clone(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = Array2::from_shape_fn((tokens.len() + 1, dim), |_| {
        rng.gen_range(-half_range..=half_range)
    });
    Ok(EmbeddingTable {
        dim,
        vocab,
        vectors,
        unk_index: tokens.len(),
    })
}

/// Embeds a sentence as a `dim x len` matrix whose column `i` is the
/// embedding of token `i` (unknown tokens fall back to the unknown row).
pub fn embed_sentence(table: &EmbeddingTable, sentence: &[String]) -> Result<Array2<f64>> {
    if sentence.is_empty() {
        return Err(Error::InvalidConfig {
            message: "cannot embed an empty sentence".to_string(),
        });
    }
    let mut out = Array2::zeros((table.dim, sentence.len()));
    for (j, token) in sentence.iter().enumerate() {
        out.column_mut(j).assign(&table.lookup(token));
    }
    Ok(out)
}
