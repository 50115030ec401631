//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus handling, model construction, training and
/// evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed line: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty corpus: {context}")]
    EmptyCorpus { context: String },

    #[error("document {id}: {message}")]
    InvalidDocument { id: String, message: String },

    #[error("document {id} is unlabeled but the operation requires labels")]
    Unlabeled { id: String },

    #[error("domain {domain} has no labeled documents")]
    EmptyDomain { domain: String },

    #[error("unknown domain: {domain}")]
    UnknownDomain { domain: String },

    #[error("vocab_size {vocab_size} is too small for {domains} domains (need at least {min})")]
    VocabTooSmall {
        vocab_size: usize,
        domains: usize,
        min: usize,
    },

    #[error("{path}:{line}: {message}")]
    EmbeddingParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate token: {token}")]
    DuplicateToken { token: String },

    #[error("shape mismatch: {message}")]
    ShapeMismatch { message: String },

    #[error("input narrower than filter: {width} column(s), filter width {filter_width}")]
    InputNarrowerThanFilter { width: usize, filter_width: usize },

    #[error("non-finite logits")]
    NonFiniteLogits,

    #[error("document {id} has no sentence of >= {min_tokens} tokens")]
    NoEligibleSentence { id: String, min_tokens: usize },

    #[error("no eligible sentences to rank")]
    NoEligibleScores,

    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error("checkpoint {path}: format version {found} unsupported (expected {expected})")]
    CheckpointVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("lexicon file missing: {path}")]
    MissingLexicon { path: PathBuf },

    #[error("{metric}: single-class input (need both labels)")]
    SingleClass { metric: String },

    #[error("{metric}: empty input")]
    EmptyInput { metric: String },

    #[error("model file {path}: {message}")]
    ModelFile { path: PathBuf, message: String },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
