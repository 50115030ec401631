//! The shared-trunk, split-head convolutional document classifier.
//!
//! The trunk embeds a document in two convolution stages: CNN1 turns each
//! sentence's word matrix into a sentence embedding, CNN2 turns the matrix of
//! sentence embeddings into an intermediate document vector, and a fully
//! connected layer produces the document embedding. The trunk is shared by
//! all domains; on top of it sits one independent two-way softmax head per
//! domain. A mini-batch always comes from a single domain and updates only
//! the trunk and that domain's head, so by training jointly the trunk is
//! learned once instead of once per domain.

mod checkpoint;

pub use checkpoint::{load_model, model_from_bytes, model_to_bytes, save_model, CHECKPOINT_VERSION};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{domain_minibatches, Corpus, Document};
use crate::embedding::{embed_sentence, EmbeddingTable};
use crate::error::{Error, Result};
use crate::netops::{
    conv_forward, dense_forward, linear_forward, pool, softmax2, softmax_xent, BankGrad, ConvTape,
    DenseGrad, DenseLayer, DenseTape, FilterBank, LinearTape, PoolTape, Pooling,
};

/// Model hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsnnConfig {
    pub embed_dim: usize,
    pub cnn1_kernels: usize,
    pub cnn1_width: usize,
    /// Sentences with fewer tokens are skipped entirely: no embedding, no
    /// saliency score.
    pub min_sentence_tokens: usize,
    pub cnn2_kernels: usize,
    pub cnn2_width: usize,
    pub dense_nodes: usize,
    pub pooling: Pooling,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SsnnConfig {
    fn default() -> Self {
        SsnnConfig {
            embed_dim: 200,
            cnn1_kernels: 50,
            cnn1_width: 5,
            min_sentence_tokens: 5,
            cnn2_kernels: 10,
            cnn2_width: 3,
            dense_nodes: 10,
            pooling: Pooling::Average,
            learning_rate: 0.1,
            batch_size: 10,
            epochs: 10,
            seed: 0,
        }
    }
}

impl SsnnConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.embed_dim,
            self.cnn1_kernels,
            self.cnn1_width,
            self.min_sentence_tokens,
            self.cnn2_kernels,
            self.cnn2_width,
            self.dense_nodes,
            self.batch_size,
            self.epochs,
        ];
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::InvalidConfig {
                message: "all model size, batch and epoch counts must be >= 1".to_string(),
            });
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig {
                message: format!("learning_rate must be > 0, got {}", self.learning_rate),
            });
        }
        Ok(())
    }

    /// A sentence must satisfy both the configured minimum and the CNN1
    /// width (a valid convolution needs at least `cnn1_width` columns).
    pub fn eligibility_threshold(&self) -> usize {
        self.min_sentence_tokens.max(self.cnn1_width)
    }
}

/// The trained (or in-training) model: one shared trunk, one softmax head
/// per domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SsnnModel {
    pub config: SsnnConfig,
    pub cnn1: FilterBank,
    /// Input dimension equals `cnn1_kernels`: CNN2 convolves over sentence
    /// embeddings, so its kernel height is not an independent knob.
    pub cnn2: FilterBank,
    pub dense: DenseLayer,
    pub heads: Vec<DenseLayer>,
    pub domain_ids: Vec<String>,
}

/// Builds a model with seeded initialization; two builds from equal
/// configurations are bit-identical.
pub fn build(config: &SsnnConfig, domains: &[String]) -> Result<SsnnModel> {
    config.validate()?;
    if domains.is_empty() {
        return Err(Error::InvalidConfig {
            message: "domain list must be non-empty".to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cnn1 = FilterBank::glorot(config.embed_dim, config.cnn1_width, config.cnn1_kernels, &mut rng);
    let cnn2 = FilterBank::glorot(config.cnn1_kernels, config.cnn2_width, config.cnn2_kernels, &mut rng);
    let dense = DenseLayer::glorot(config.cnn2_kernels, config.dense_nodes, &mut rng);
    let heads = domains
        .iter()
        .map(|_| DenseLayer::glorot(config.dense_nodes, 2, &mut rng))
        .collect();
    Ok(SsnnModel {
        config: config.clone(),
        cnn1,
        cnn2,
        dense,
        heads,
        domain_ids: domains.to_vec(),
    })
}

/// Tape of the sentence-matrix-to-probability stage.
#[derive(Debug)]
pub struct UpperTape {
    s_cols: usize,
    conv2: ConvTape,
    pool2: PoolTape,
    dense: DenseTape,
    head: LinearTape,
    domain_idx: usize,
    logits: (f64, f64),
    h: f64,
}

impl UpperTape {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn logits(&self) -> (f64, f64) {
        self.logits
    }

    /// Cross-entropy of the stored logits against `y`.
    pub fn loss(&self, y: u8) -> Result<f64> {
        Ok(softmax_xent(self.logits, y)?.1)
    }
}

/// Tape of a full document forward pass.
#[derive(Debug)]
pub struct SsnnTape {
    /// Original sentence indices that were embedded, in order.
    eligible: Vec<usize>,
    sentence_tapes: Vec<(ConvTape, PoolTape)>,
    s_matrix: Array2<f64>,
    upper: UpperTape,
}

impl SsnnTape {
    pub fn h(&self) -> f64 {
        self.upper.h
    }

    pub fn logits(&self) -> (f64, f64) {
        self.upper.logits
    }

    pub fn loss(&self, y: u8) -> Result<f64> {
        self.upper.loss(y)
    }

    pub fn eligible_sentences(&self) -> &[usize] {
        &self.eligible
    }

    /// The sentence matrix fed to CNN2, zero-padded on the right up to the
    /// CNN2 width when the document has fewer eligible sentences.
    pub fn sentence_matrix(&self) -> &Array2<f64> {
        &self.s_matrix
    }

    pub fn real_columns(&self) -> usize {
        self.eligible.len()
    }

    /// Dismantles the tape into the padded sentence matrix, the embedded
    /// sentence indices, and the tape of the sentence-to-prediction stage.
    /// The per-sentence tapes are dropped; use this when only gradients with
    /// respect to the sentence matrix are needed.
    pub fn into_sentence_stage(self) -> (Array2<f64>, Vec<usize>, UpperTape) {
        (self.s_matrix, self.eligible, self.upper)
    }
}

/// Parameter gradients of one backward pass. The head gradient applies to
/// `domain_idx` only; heads of other domains receive none by construction.
#[derive(Debug)]
pub struct SsnnGradients {
    pub domain_idx: usize,
    pub cnn1: BankGrad,
    pub cnn2: BankGrad,
    pub dense: DenseGrad,
    pub head: DenseGrad,
}

impl SsnnGradients {
    pub fn zeros_like(model: &SsnnModel, domain_idx: usize) -> Self {
        SsnnGradients {
            domain_idx,
            cnn1: BankGrad::zeros_like(&model.cnn1),
            cnn2: BankGrad::zeros_like(&model.cnn2),
            dense: DenseGrad::zeros_like(&model.dense),
            head: DenseGrad::zeros_like(&model.heads[domain_idx]),
        }
    }

    pub fn accumulate(&mut self, other: &SsnnGradients) {
        assert_eq!(self.domain_idx, other.domain_idx, "gradients from different heads");
        self.cnn1.accumulate(&other.cnn1);
        self.cnn2.accumulate(&other.cnn2);
        self.dense.accumulate(&other.dense);
        self.head.accumulate(&other.head);
    }

    /// Visits gradient entries in the model's parameter order (trunk, then
    /// the gradient's own head).
    pub fn for_each(&self, f: &mut impl FnMut(f64)) {
        self.cnn1.for_each(f);
        self.cnn2.for_each(f);
        self.dense.for_each(f);
        self.head.for_each(f);
    }
}

impl SsnnModel {
    pub fn domain_count(&self) -> usize {
        self.domain_ids.len()
    }

    pub fn domain_index(&self, domain: &str) -> Result<usize> {
        self.domain_ids
            .iter()
            .position(|d| d == domain)
            .ok_or_else(|| Error::UnknownDomain {
                domain: domain.to_string(),
            })
    }

    fn check_domain(&self, domain_idx: usize) -> Result<()> {
        if domain_idx >= self.heads.len() {
            return Err(Error::UnknownDomain {
                domain: format!("index {domain_idx} (model has {} heads)", self.heads.len()),
            });
        }
        Ok(())
    }

    /// Embeds the eligible sentences of a document and stacks the resulting
    /// sentence embeddings as columns. Returns the unpadded matrix, the
    /// original indices of the embedded sentences, and the per-sentence
    /// tapes.
    fn sentence_stage(
        &self,
        table: &EmbeddingTable,
        doc: &Document,
    ) -> Result<(Array2<f64>, Vec<usize>, Vec<(ConvTape, PoolTape)>)> {
        if table.dim() != self.config.embed_dim {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "embedding table dim {} does not match model embed_dim {}",
                    table.dim(),
                    self.config.embed_dim
                ),
            });
        }
        let threshold = self.config.eligibility_threshold();
        let eligible: Vec<usize> = (0..doc.sentences.len())
            .filter(|&i| doc.sentences[i].len() >= threshold)
            .collect();
        if eligible.is_empty() {
            return Err(Error::NoEligibleSentence {
                id: doc.id.clone(),
                min_tokens: threshold,
            });
        }

        let mut s = Array2::zeros((self.config.cnn1_kernels, eligible.len()));
        let mut tapes = Vec::with_capacity(eligible.len());
        for (col, &idx) in eligible.iter().enumerate() {
            let word_matrix = embed_sentence(table, &doc.sentences[idx])?;
            let (map, conv_tape) = conv_forward(&self.cnn1, &word_matrix)?;
            let (embedding, pool_tape) = pool(&map, self.config.pooling)?;
            s.column_mut(col).assign(&embedding);
            tapes.push((conv_tape, pool_tape));
        }
        Ok((s, eligible, tapes))
    }

    /// Classifies from a precomputed sentence matrix (columns are sentence
    /// embeddings). Pads the matrix with zero columns up to the CNN2 width
    /// if needed. This is the stage the saliency scores differentiate.
    pub fn forward_from_sentences(
        &self,
        s: &Array2<f64>,
        domain_idx: usize,
    ) -> Result<(f64, UpperTape)> {
        self.check_domain(domain_idx)?;
        if s.nrows() != self.config.cnn1_kernels {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "sentence matrix has {} rows, expected {}",
                    s.nrows(),
                    self.config.cnn1_kernels
                ),
            });
        }
        if s.ncols() == 0 {
            return Err(Error::ShapeMismatch {
                message: "sentence matrix has no columns".to_string(),
            });
        }
        let padded = if s.ncols() < self.config.cnn2_width {
            let mut p = Array2::zeros((s.nrows(), self.config.cnn2_width));
            p.slice_mut(ndarray::s![.., ..s.ncols()]).assign(s);
            p
        } else {
            s.clone()
        };

        let (map, conv2_tape) = conv_forward(&self.cnn2, &padded)?;
        let (intermediate, pool2_tape) = pool(&map, self.config.pooling)?;
        // "flatten" is the identity here: pooling already yields a vector
        let (doc_embedding, dense_tape) = dense_forward(&self.dense, &intermediate)?;
        let (logit_vec, head_tape) = linear_forward(&self.heads[domain_idx], &doc_embedding)?;
        let logits = (logit_vec[0], logit_vec[1]);
        let h = softmax2(logits).1;

        Ok((
            h,
            UpperTape {
                s_cols: padded.ncols(),
                conv2: conv2_tape,
                pool2: pool2_tape,
                dense: dense_tape,
                head: head_tape,
                domain_idx,
                logits,
                h,
            },
        ))
    }

    /// Full forward pass: probability that the document is knowledgeable,
    /// judged by the given domain's head.
    pub fn forward(
        &self,
        table: &EmbeddingTable,
        doc: &Document,
        domain_idx: usize,
    ) -> Result<(f64, SsnnTape)> {
        self.check_domain(domain_idx)?;
        let (s, eligible, sentence_tapes) = self.sentence_stage(table, doc)?;
        let (h, upper) = self.forward_from_sentences(&s, domain_idx)?;
        let s_matrix = if s.ncols() < self.config.cnn2_width {
            let mut p = Array2::zeros((s.nrows(), self.config.cnn2_width));
            p.slice_mut(ndarray::s![.., ..s.ncols()]).assign(&s);
            p
        } else {
            s
        };
        Ok((
            h,
            SsnnTape {
                eligible,
                sentence_tapes,
                s_matrix,
                upper,
            },
        ))
    }

    /// Hard label: 1 iff the knowledgeable probability is strictly above 0.5.
    pub fn predict(&self, table: &EmbeddingTable, doc: &Document, domain_idx: usize) -> Result<u8> {
        let (h, _) = self.forward(table, doc, domain_idx)?;
        Ok(u8::from(h > 0.5))
    }

    /// Cross-entropy loss of one document against its label.
    pub fn loss(
        &self,
        table: &EmbeddingTable,
        doc: &Document,
        domain_idx: usize,
        y: u8,
    ) -> Result<f64> {
        let (_, tape) = self.forward(table, doc, domain_idx)?;
        tape.loss(y)
    }

    /// Backward pass of the sentence-level stage: the gradient of the loss
    /// against label `y` with respect to the (padded) sentence matrix.
    pub fn backprop_to_sentences(&self, tape: UpperTape, y: u8) -> Result<Array2<f64>> {
        let (_, _, _, d_s) = self.upper_backward(tape, y)?;
        Ok(d_s)
    }

    fn upper_backward(
        &self,
        tape: UpperTape,
        y: u8,
    ) -> Result<(BankGrad, DenseGrad, DenseGrad, Array2<f64>)> {
        let (_, _, softmax_tape) = softmax_xent(tape.logits, y)?;
        let d_logits = softmax_tape.backward();
        let d_logits = Array1::from(vec![d_logits.0, d_logits.1]);

        let (head_grad, d_doc_embedding) =
            tape.head.backward(&self.heads[tape.domain_idx], &d_logits);
        let (dense_grad, d_intermediate) = tape.dense.backward(&self.dense, &d_doc_embedding);
        let d_map2 = tape.pool2.backward(&d_intermediate);
        let (cnn2_grad, d_s) = tape.conv2.backward(&self.cnn2, &d_map2);
        debug_assert_eq!(d_s.ncols(), tape.s_cols);
        Ok((cnn2_grad, dense_grad, head_grad, d_s))
    }

    /// Full backward pass. Returns the parameter gradients and the gradient
    /// with respect to the padded sentence matrix (column i is the
    /// backpropagation message to sentence embedding i).
    pub fn backprop(&self, tape: SsnnTape, y: u8) -> Result<(SsnnGradients, Array2<f64>)> {
        let domain_idx = tape.upper.domain_idx;
        let (cnn2_grad, dense_grad, head_grad, d_s) = self.upper_backward(tape.upper, y)?;

        let mut cnn1_grad = BankGrad::zeros_like(&self.cnn1);
        for (col, (conv_tape, pool_tape)) in tape.sentence_tapes.into_iter().enumerate() {
            let upstream = d_s.column(col).to_owned();
            let d_map = pool_tape.backward(&upstream);
            // input gradient is dropped: embeddings are frozen
            let (grad, _) = conv_tape.backward(&self.cnn1, &d_map);
            cnn1_grad.accumulate(&grad);
        }

        Ok((
            SsnnGradients {
                domain_idx,
                cnn1: cnn1_grad,
                cnn2: cnn2_grad,
                dense: dense_grad,
                head: head_grad,
            },
            d_s,
        ))
    }

    /// Applies one mini-batch update: `params -= lr/|M| * sum of gradients`,
    /// touching the trunk and the batch domain's head only. Returns the mean
    /// document loss of the batch (before the update).
    pub fn train_batch(
        &mut self,
        table: &EmbeddingTable,
        docs: &[&Document],
        domain_idx: usize,
    ) -> Result<f64> {
        if docs.is_empty() {
            return Err(Error::InvalidConfig {
                message: "cannot train on an empty batch".to_string(),
            });
        }
        self.check_domain(domain_idx)?;

        let mut total = SsnnGradients::zeros_like(self, domain_idx);
        let mut loss_sum = 0.0;
        for doc in docs {
            let y = doc.label.ok_or_else(|| Error::Unlabeled { id: doc.id.clone() })?;
            let (_, tape) = self.forward(table, doc, domain_idx)?;
            loss_sum += tape.loss(y)?;
            let (grads, _) = self.backprop(tape, y)?;
            total.accumulate(&grads);
        }

        let step = self.config.learning_rate / docs.len() as f64;
        self.cnn1.step(&total.cnn1, step);
        self.cnn2.step(&total.cnn2, step);
        self.dense.step(&total.dense, step);
        self.heads[domain_idx].step(&total.head, step);
        Ok(loss_sum / docs.len() as f64)
    }
}

/// Per-epoch mean training loss, overall and per domain (aligned with the
/// model's domain list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_loss: f64,
    pub mean_loss_per_domain: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub domains: Vec<String>,
    pub epochs: Vec<EpochReport>,
}

/// Mini-batch gradient-descent training over a labeled corpus.
///
/// Each epoch re-shuffles every domain's documents into domain-homogeneous
/// batches (round-robin across domains) and applies [`SsnnModel::train_batch`]
/// to each. Losses are the pre-update means per document.
pub fn train(
    model: &mut SsnnModel,
    table: &EmbeddingTable,
    corpus: &Corpus,
) -> Result<TrainingReport> {
    corpus.require_labels()?;
    for domain in &corpus.domains {
        model.domain_index(domain)?;
        if !corpus.documents.iter().any(|d| &d.domain == domain) {
            return Err(Error::EmptyDomain {
                domain: domain.clone(),
            });
        }
    }
    for domain in &model.domain_ids {
        if !corpus.documents.iter().any(|d| &d.domain == domain) {
            return Err(Error::EmptyDomain {
                domain: domain.clone(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
    let mut report = TrainingReport {
        domains: model.domain_ids.clone(),
        epochs: Vec::with_capacity(model.config.epochs),
    };

    for epoch in 0..model.config.epochs {
        let epoch_seed: u64 = rng.gen();
        let batches = domain_minibatches(corpus, model.config.batch_size, epoch_seed)?;

        let q = model.domain_count();
        let mut loss_sums = vec![0.0; q];
        let mut doc_counts = vec![0usize; q];
        for (corpus_domain, docs) in &batches {
            let head_idx = model.domain_index(&corpus.domains[*corpus_domain])?;
            let mean_loss = model.train_batch(table, docs, head_idx)?;
            loss_sums[head_idx] += mean_loss * docs.len() as f64;
            doc_counts[head_idx] += docs.len();
        }

        let total_docs: usize = doc_counts.iter().sum();
        let mean_loss = loss_sums.iter().sum::<f64>() / total_docs as f64;
        let mean_loss_per_domain = loss_sums
            .iter()
            .zip(&doc_counts)
            .map(|(&s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
            .collect();
        report.epochs.push(EpochReport {
            epoch,
            mean_loss,
            mean_loss_per_domain,
        });
    }
    Ok(report)
}

/// Exact parameter counts: `n_low` for the shared trunk, `n_high` for one
/// softmax head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub n_low: usize,
    pub n_high: usize,
    pub q_domains: usize,
}

/// Counts parameters by enumerating the stored scalars, not from a formula.
pub fn count_params(model: &SsnnModel) -> ParamCount {
    let mut n_low = 0usize;
    model.cnn1.for_each_param(&mut |_| n_low += 1);
    model.cnn2.for_each_param(&mut |_| n_low += 1);
    model.dense.for_each_param(&mut |_| n_low += 1);
    let mut n_high = 0usize;
    model.heads[0].for_each_param(&mut |_| n_high += 1);
    ParamCount {
        n_low,
        n_high,
        q_domains: model.domain_count(),
    }
}

/// Fraction of parameters saved by sharing one trunk across `Q` domains
/// instead of building `Q` independent models:
/// `r = 1 - (n_low + Q n_high) / (Q n_low + Q n_high)
///    = (1 - 1/Q) * n_low / (n_low + n_high)`.
pub fn saving_ratio(pc: &ParamCount) -> Result<f64> {
    if pc.q_domains == 0 {
        return Err(Error::InvalidConfig {
            message: "saving ratio needs at least one domain".to_string(),
        });
    }
    let q = pc.q_domains as f64;
    let n_low = pc.n_low as f64;
    let n_high = pc.n_high as f64;
    Ok((1.0 - 1.0 / q) * n_low / (n_low + n_high))
}

impl SsnnModel {
    /// Layer-order blocks of the parameter vector: name and scalar count.
    pub fn param_layout(&self) -> Vec<(String, usize)> {
        let mut layout = vec![
            ("cnn1".to_string(), self.cnn1.param_count()),
            ("cnn2".to_string(), self.cnn2.param_count()),
            ("dense".to_string(), self.dense.param_count()),
        ];
        for (head, domain) in self.heads.iter().zip(&self.domain_ids) {
            layout.push((format!("head:{domain}"), head.param_count()));
        }
        layout
    }

    /// Visits every trainable parameter in declared layer order: cnn1, cnn2,
    /// dense, then the heads in domain order.
    pub fn visit_params(&self, f: &mut impl FnMut(f64)) {
        self.cnn1.for_each_param(f);
        self.cnn2.for_each_param(f);
        self.dense.for_each_param(f);
        for head in &self.heads {
            head.for_each_param(f);
        }
    }

    pub fn visit_params_mut(&mut self, f: &mut impl FnMut(&mut f64)) {
        self.cnn1.for_each_param_mut(f);
        self.cnn2.for_each_param_mut(f);
        self.dense.for_each_param_mut(f);
        for head in &mut self.heads {
            head.for_each_param_mut(f);
        }
    }

    pub fn params_vec(&self) -> Vec<f64> {
        let mut v = Vec::new();
        self.visit_params(&mut |x| v.push(x));
        v
    }

    pub fn set_params_vec(&mut self, values: &[f64]) -> Result<()> {
        let expected = self.params_vec().len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                message: format!("expected {expected} parameters, got {}", values.len()),
            });
        }
        let mut it = values.iter();
        self.visit_params_mut(&mut |p| *p = *it.next().unwrap());
        Ok(())
    }
}
