//! Knowledgeable-document classification and snippet extraction for
//! multi-domain text corpora.
//!
//! The crate implements two classifiers over pre-tokenized documents:
//!
//! * A hierarchical convolutional model with a shared trunk (word-to-sentence
//!   convolution, sentence-to-document convolution, fully connected layer)
//!   and one softmax head per content domain. The trunk is trained jointly on
//!   every domain; each head only on its own. The same network yields
//!   per-sentence saliency scores used to extract knowledgeable snippets.
//! * A feature-engineering baseline: POS histogram statistics over a sliding
//!   window, word and sentence statistics (a 114-slot feature vector), TF-IDF
//!   bag-of-words, and a linear hinge-loss SVM.
//!
//! All numerical procedures are hand-written (no autodiff framework) and are
//! covered by independent oracles in the test suites: brute-force
//! convolutions, central finite differences, pairwise rank statistics and
//! window enumerators.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod featsvm;
pub mod lexicons;
pub mod netops;
pub mod saliency;
pub mod ssnn;

pub use error::{Error, Result};
