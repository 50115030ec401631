//! Multi-domain document corpus: data model, JSONL persistence,
//! deterministic splitting, domain-homogeneous mini-batches and synthetic
//! corpus generation.
//!
//! A corpus file is UTF-8 JSONL, one document per line:
//!
//! ```json
//! {"id":"a-001","domain":"auto","label":1,
//!  "title_tokens":["guide","to","turning"],
//!  "sentences":[["slow","down","before","the","corner"]],
//!  "pos_tags":[[0,1,2,0,3]],
//!  "paragraphs":[1]}
//! ```
//!
//! `label` is 0, 1 or null. `pos_tags` is optional and must mirror the shape
//! of `sentences`. `paragraphs` is optional and lists the number of sentences
//! in each paragraph (it must sum to the sentence count); when absent the
//! whole content counts as a single paragraph. Unknown keys are rejected.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicons;

/// One pre-tokenized, optionally POS-tagged document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub domain: String,
    /// 1 = knowledgeable, 0 = unknowledgeable, `None` = unlabeled.
    pub label: Option<u8>,
    pub title_tokens: Vec<String>,
    pub sentences: Vec<Vec<String>>,
    /// Parallel to `sentences`; tag values index into a tagset of size `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos_tags: Option<Vec<Vec<usize>>>,
    /// Sentences per paragraph; must sum to `sentences.len()`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraphs: Option<Vec<usize>>,
}

impl Document {
    /// Total number of content tokens.
    pub fn content_token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }

    /// Structural validation: non-empty sentences, binary label, and shape
    /// agreement for the optional fields.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::InvalidDocument {
                id: self.id.clone(),
                message,
            })
        };
        if self.sentences.is_empty() {
            return fail("sentences must be non-empty".to_string());
        }
        if let Some(pos) = self.sentences.iter().position(|s| s.is_empty()) {
            return fail(format!("sentence {pos} is empty"));
        }
        if let Some(label) = self.label {
            if label > 1 {
                return fail(format!("label must be 0 or 1, got {label}"));
            }
        }
        if let Some(tags) = &self.pos_tags {
            if tags.len() != self.sentences.len() {
                return fail(format!(
                    "pos_tags has {} rows but there are {} sentences",
                    tags.len(),
                    self.sentences.len()
                ));
            }
            for (i, (row, sentence)) in tags.iter().zip(&self.sentences).enumerate() {
                if row.len() != sentence.len() {
                    return fail(format!(
                        "pos_tags row {i} has {} tags but sentence {i} has {} tokens",
                        row.len(),
                        sentence.len()
                    ));
                }
            }
        }
        if let Some(paragraphs) = &self.paragraphs {
            if paragraphs.iter().any(|&n| n == 0) {
                return fail("paragraphs must all contain at least one sentence".to_string());
            }
            let total: usize = paragraphs.iter().sum();
            if total != self.sentences.len() {
                return fail(format!(
                    "paragraphs sum to {total} but there are {} sentences",
                    self.sentences.len()
                ));
            }
        }
        Ok(())
    }
}

/// A set of documents together with the ordered list of domains they
/// come from (first-appearance order).
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub domains: Vec<String>,
}

impl Corpus {
    /// Builds a corpus from validated documents; domains are collected in
    /// first-appearance order.
    pub fn from_documents(documents: Vec<Document>) -> Result<Self> {
        let mut domains = Vec::new();
        let mut seen = HashSet::new();
        for doc in &documents {
            doc.validate()?;
            if seen.insert(doc.domain.clone()) {
                domains.push(doc.domain.clone());
            }
        }
        Ok(Corpus { documents, domains })
    }

    /// Number of domains Q.
    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domain_index(&self, domain: &str) -> Option<usize> {
        self.domains.iter().position(|d| d == domain)
    }

    /// Errors unless every document carries a label.
    pub fn require_labels(&self) -> Result<()> {
        for doc in &self.documents {
            if doc.label.is_none() {
                return Err(Error::Unlabeled { id: doc.id.clone() });
            }
        }
        Ok(())
    }
}

/// Parameters of the deterministic train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of each domain that goes to the training set.
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.75,
            seed: 0,
        }
    }
}

/// Loads a JSONL corpus file. Documents keep file order; domains are listed
/// in first-appearance order.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let doc: Document = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        documents.push(doc);
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus {
            context: path.display().to_string(),
        });
    }
    Corpus::from_documents(documents)
}

/// Writes a corpus as JSONL, one document per line.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for doc in &corpus.documents {
        serde_json::to_writer(&mut out, doc).expect("document serialization cannot fail");
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Deterministic per-domain split: for each domain, `ceil(train_fraction * n)`
/// documents go to the training corpus and the rest to the test corpus.
/// Both halves keep the input's domain list and file order.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidConfig {
            message: format!("train_fraction must be in (0,1), got {}", spec.train_fraction),
        });
    }
    corpus.require_labels()?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for domain in &corpus.domains {
        let mut indices: Vec<usize> = corpus
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| &d.domain == domain)
            .map(|(i, _)| i)
            .collect();
        indices.shuffle(&mut rng);
        let n_train = (spec.train_fraction * indices.len() as f64).ceil() as usize;
        train_idx.extend_from_slice(&indices[..n_train]);
        test_idx.extend_from_slice(&indices[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize]| Corpus {
        documents: idx.iter().map(|&i| corpus.documents[i].clone()).collect(),
        domains: corpus.domains.clone(),
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// Shuffles each domain's labeled documents and chunks them into
/// domain-homogeneous batches, interleaved round-robin over the domain list
/// so that no domain's batches are starved at either end of an epoch.
///
/// Every document appears in exactly one batch; the last batch of a domain
/// may be smaller than `batch_size`.
pub fn domain_minibatches<'a>(
    corpus: &'a Corpus,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<(usize, Vec<&'a Document>)>> {
    if batch_size == 0 {
        return Err(Error::InvalidConfig {
            message: "batch_size must be >= 1".to_string(),
        });
    }
    if corpus.documents.is_empty() {
        return Err(Error::EmptyCorpus {
            context: "no documents to batch".to_string(),
        });
    }
    corpus.require_labels()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queues: Vec<std::collections::VecDeque<Vec<&Document>>> = Vec::new();
    for domain in &corpus.domains {
        let mut docs: Vec<&Document> = corpus
            .documents
            .iter()
            .filter(|d| &d.domain == domain)
            .collect();
        docs.shuffle(&mut rng);
        let batches = docs
            .chunks(batch_size)
            .map(|chunk| chunk.to_vec())
            .collect();
        queues.push(batches);
    }

    let mut out = Vec::new();
    loop {
        let mut emitted = false;
        for (q, queue) in queues.iter_mut().enumerate() {
            if let Some(batch) = queue.pop_front() {
                out.push((q, batch));
                emitted = true;
            }
        }
        if !emitted {
            break;
        }
    }
    Ok(out)
}

/// All distinct tokens of a corpus (titles and content), sorted, for
/// building embedding tables deterministically.
pub fn collect_vocab(corpus: &Corpus) -> Vec<String> {
    let mut vocab = std::collections::BTreeSet::new();
    for doc in &corpus.documents {
        for token in &doc.title_tokens {
            vocab.insert(token.clone());
        }
        for sentence in &doc.sentences {
            for token in sentence {
                vocab.insert(token.clone());
            }
        }
    }
    vocab.into_iter().collect()
}

/// Knobs of the synthetic corpus generator. The defaults give a cleanly
/// separable, roughly class-balanced corpus whose documents look like short
/// articles: a handful of sentences, 6-11 tokens each, with POS tags and an
/// occasional conclusive title word.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub domains: usize,
    pub docs_per_domain: usize,
    pub vocab_size: usize,
    pub seed: u64,
    /// Fraction of knowledgeable documents per domain.
    pub knowledgeable_fraction: f64,
    /// Probability that a sentence of a knowledgeable document is drawn from
    /// the domain's knowledgeable token distribution. More than half of the
    /// sentences are always planted, whatever this rate.
    pub planted_sentence_rate: f64,
    /// Probability that a sentence of an unknowledgeable document is planted
    /// anyway (kept strictly below half of the document).
    pub negative_contamination: f64,
    pub sentences_per_doc: (usize, usize),
    pub tokens_per_sentence: (usize, usize),
    pub title_len: (usize, usize),
    /// Size of the POS tagset used for `pos_tags`.
    pub pos_tag_count: usize,
    /// Probability that a knowledgeable document's title contains conclusive
    /// words.
    pub conclusive_rate_knowledgeable: f64,
    pub conclusive_rate_unknowledgeable: f64,
}

impl SyntheticConfig {
    pub fn new(domains: usize, docs_per_domain: usize, vocab_size: usize, seed: u64) -> Self {
        SyntheticConfig {
            domains,
            docs_per_domain,
            vocab_size,
            seed,
            knowledgeable_fraction: 0.5,
            planted_sentence_rate: 0.8,
            negative_contamination: 0.0,
            sentences_per_doc: (4, 7),
            tokens_per_sentence: (6, 11),
            title_len: (3, 6),
            pos_tag_count: 49,
            conclusive_rate_knowledgeable: 0.9,
            conclusive_rate_unknowledgeable: 0.05,
        }
    }
}

/// Token naming scheme of the generator: sentences of knowledgeable origin
/// use tokens `k<domain>_<i>`, filler sentences use `u<domain>_<i>`. The
/// two vocabularies are disjoint per domain and across domains.
pub fn sentence_is_planted(sentence: &[String]) -> bool {
    let planted = sentence.iter().filter(|t| t.starts_with('k')).count();
    planted * 2 > sentence.len()
}

/// Generates a labeled multi-domain corpus with the default generator knobs.
/// Knowledgeable documents draw more than half of their sentences from a
/// domain-specific token distribution disjoint from the filler distribution,
/// so the corpus is linearly separable under bag-of-words.
pub fn gen_synthetic(
    domains: usize,
    docs_per_domain: usize,
    vocab_size: usize,
    seed: u64,
) -> Result<Corpus> {
    gen_synthetic_with(&SyntheticConfig::new(domains, docs_per_domain, vocab_size, seed))
}

/// As [`gen_synthetic`], with every generator knob exposed.
pub fn gen_synthetic_with(cfg: &SyntheticConfig) -> Result<Corpus> {
    if cfg.domains == 0 || cfg.docs_per_domain == 0 || cfg.vocab_size == 0 {
        return Err(Error::InvalidConfig {
            message: "domains, docs_per_domain and vocab_size must all be >= 1".to_string(),
        });
    }
    let slice_size = cfg.vocab_size / (2 * cfg.domains);
    if slice_size == 0 {
        return Err(Error::VocabTooSmall {
            vocab_size: cfg.vocab_size,
            domains: cfg.domains,
            min: 2 * cfg.domains,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut documents = Vec::with_capacity(cfg.domains * cfg.docs_per_domain);

    for q in 0..cfg.domains {
        let domain = format!("dom{q}");
        let n_pos = (cfg.knowledgeable_fraction * cfg.docs_per_domain as f64).round() as usize;
        let mut labels = vec![1u8; n_pos.min(cfg.docs_per_domain)];
        labels.resize(cfg.docs_per_domain, 0);
        labels.shuffle(&mut rng);

        for (i, &label) in labels.iter().enumerate() {
            documents.push(gen_document(cfg, &mut rng, q, &domain, i, label, slice_size));
        }
    }
    Corpus::from_documents(documents)
}

fn gen_document(
    cfg: &SyntheticConfig,
    rng: &mut ChaCha8Rng,
    q: usize,
    domain: &str,
    index: usize,
    label: u8,
    slice_size: usize,
) -> Document {
    let n_sentences = rng.gen_range(cfg.sentences_per_doc.0..=cfg.sentences_per_doc.1);

    let rate = if label == 1 {
        cfg.planted_sentence_rate
    } else {
        cfg.negative_contamination
    };
    let mut planted: Vec<bool> = (0..n_sentences).map(|_| rng.gen_bool(rate)).collect();
    let count = |flags: &[bool]| flags.iter().filter(|&&p| p).count();
    if label == 1 {
        // knowledgeable means strictly more than half of the sentences
        while count(&planted) * 2 <= n_sentences {
            let i = rng.gen_range(0..n_sentences);
            planted[i] = true;
        }
    } else {
        while count(&planted) * 2 >= n_sentences.max(1) && count(&planted) > 0 {
            let i = (0..n_sentences).find(|&i| planted[i]).unwrap();
            planted[i] = false;
        }
    }

    let mut sentences = Vec::with_capacity(n_sentences);
    let mut pos_tags = Vec::with_capacity(n_sentences);
    for &is_planted in &planted {
        let len = rng.gen_range(cfg.tokens_per_sentence.0..=cfg.tokens_per_sentence.1);
        let sentence: Vec<String> = (0..len)
            .map(|_| synth_token(rng, q, is_planted, slice_size))
            .collect();
        pos_tags.push(synth_tags(rng, cfg.pos_tag_count, is_planted, len));
        sentences.push(sentence);
    }

    // Titles come from the document's dominant distribution, optionally
    // seeded with conclusive words.
    let title_len = rng.gen_range(cfg.title_len.0..=cfg.title_len.1);
    let mut title_tokens: Vec<String> = (0..title_len)
        .map(|_| synth_token(rng, q, label == 1, slice_size))
        .collect();
    let conclusive_rate = if label == 1 {
        cfg.conclusive_rate_knowledgeable
    } else {
        cfg.conclusive_rate_unknowledgeable
    };
    if rng.gen_bool(conclusive_rate) {
        for _ in 0..rng.gen_range(1..=2usize) {
            let word = lexicons::DEFAULT_CONCLUSIVE[rng.gen_range(0..lexicons::DEFAULT_CONCLUSIVE.len())];
            let at = rng.gen_range(0..=title_tokens.len());
            title_tokens.insert(at, word.to_string());
        }
    }

    let paragraphs = random_partition(rng, n_sentences);

    Document {
        id: format!("{domain}-{index:04}"),
        domain: domain.to_string(),
        label: Some(label),
        title_tokens,
        sentences,
        pos_tags: Some(pos_tags),
        paragraphs: Some(paragraphs),
    }
}

fn synth_token(rng: &mut ChaCha8Rng, q: usize, planted: bool, slice_size: usize) -> String {
    let i = rng.gen_range(0..slice_size);
    if planted {
        format!("k{q}_{i}")
    } else {
        format!("u{q}_{i}")
    }
}

/// POS tags carry a class signal: planted sentences favor the low band of
/// the tagset, filler sentences the next band up.
fn synth_tags(rng: &mut ChaCha8Rng, k: usize, planted: bool, len: usize) -> Vec<usize> {
    let band = (k / 4).max(1);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.7) {
                let base = if planted { 0 } else { band.min(k - 1) };
                (base + rng.gen_range(0..band)).min(k - 1)
            } else {
                rng.gen_range(0..k)
            }
        })
        .collect()
}

fn random_partition(rng: &mut ChaCha8Rng, total: usize) -> Vec<usize> {
    let paragraphs = rng.gen_range(1..=total.min(3));
    let mut sizes = vec![1usize; paragraphs];
    for _ in 0..total - paragraphs {
        let i = rng.gen_range(0..paragraphs);
        sizes[i] += 1;
    }
    sizes
}
