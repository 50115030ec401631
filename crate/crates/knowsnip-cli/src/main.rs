//! `knowsnip` - batch workflow around the library: synthesize corpora,
//! train and apply the convolutional classifier and the SVM baseline, and
//! score the results.
//!
//! Every command is a thin wrapper over library operations: all randomness
//! is pinned by `--seed`, outputs are pure functions of (inputs, config,
//! seed), and each output artifact `X` is accompanied by `X.config.json`
//! echoing the resolved configuration that produced it.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use config::RunConfig;
use knowsnip::corpus::{self, SplitSpec, SyntheticConfig};
use knowsnip::embedding;
use knowsnip::eval::{self, MetricsReport, ScoredPrediction};
use knowsnip::featsvm::{self, PhsfConfig, TrainedSvm};
use knowsnip::lexicons::Lexicons;
use knowsnip::saliency;
use knowsnip::ssnn::{self, SsnnConfig};

#[derive(Parser)]
#[command(name = "knowsnip", version, about = "Knowledgeable-document classification and snippet extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic multi-domain corpus (JSONL).
    GenSynthetic(GenSyntheticArgs),
    /// Generate a random embedding file covering a corpus vocabulary.
    GenEmbeddings(GenEmbeddingsArgs),
    /// Split a corpus into per-domain train/test JSONL files.
    Split(SplitArgs),
    /// Train the shared-trunk split-head model and write a checkpoint.
    TrainSsnn(TrainSsnnArgs),
    /// Score documents with a checkpoint (or feature rows with an SVM model).
    Predict(PredictArgs),
    /// Predict documents and extract their top-k knowledgeable sentences.
    Annotate(AnnotateArgs),
    /// Extract the hand-crafted feature vectors to CSV.
    ExtractFeatures(ExtractFeaturesArgs),
    /// Train the linear SVM baseline on a feature CSV.
    TrainSvm(TrainSvmArgs),
    /// Compute accuracy, AUC and ROC curves from a predictions file.
    Eval(EvalArgs),
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::GenSynthetic(args) => gen_synthetic(args),
        Command::GenEmbeddings(args) => gen_embeddings(args),
        Command::Split(args) => split(args),
        Command::TrainSsnn(args) => train_ssnn(args),
        Command::Predict(args) => predict(args),
        Command::Annotate(args) => annotate(args),
        Command::ExtractFeatures(args) => extract_features(args),
        Command::TrainSvm(args) => train_svm(args),
        Command::Eval(args) => eval_cmd(args),
    }
}

/// Echoes the resolved configuration next to an output artifact.
fn write_config_sidecar(out: &Path, command: &str, resolved: serde_json::Value) -> Result<()> {
    let sidecar = PathBuf::from(format!("{}.config.json", out.display()));
    let body = json!({ "command": command, "config": resolved });
    fs::write(&sidecar, serde_json::to_string_pretty(&body)? + "\n")
        .with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(())
}

fn load_run_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

// ---------------------------------------------------------------------------
// gen-synthetic

#[derive(Args)]
struct GenSyntheticArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domains: Option<usize>,
    #[arg(long)]
    docs_per_domain: Option<usize>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of knowledgeable documents per domain.
    #[arg(long)]
    knowledgeable_fraction: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn gen_synthetic(args: GenSyntheticArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let mut synth = SyntheticConfig::new(
        cfg.usize("domains", args.domains, 3)?,
        cfg.usize("docs_per_domain", args.docs_per_domain, 200)?,
        cfg.usize("vocab_size", args.vocab_size, 600)?,
        cfg.u64("seed", args.seed, 0)?,
    );
    synth.knowledgeable_fraction = cfg.f64("knowledgeable_fraction", args.knowledgeable_fraction, 0.5)?;

    let corpus = corpus::gen_synthetic_with(&synth)?;
    corpus::save_corpus(&corpus, &args.out)?;
    write_config_sidecar(
        &args.out,
        "gen-synthetic",
        json!({
            "domains": synth.domains,
            "docs_per_domain": synth.docs_per_domain,
            "vocab_size": synth.vocab_size,
            "seed": synth.seed,
            "knowledgeable_fraction": synth.knowledgeable_fraction,
        }),
    )?;
    println!(
        "wrote {} documents in {} domains to {}",
        corpus.documents.len(),
        corpus.domain_count(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-embeddings

#[derive(Args)]
struct GenEmbeddingsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus whose vocabulary the table must cover.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Entries are sampled uniformly from [-range, range].
    #[arg(long)]
    range: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn gen_embeddings(args: GenEmbeddingsArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let dim = cfg.usize("embed_dim", args.dim, 200)?;
    let seed = cfg.u64("seed", args.seed, 0)?;
    let range = cfg.f64("embed_range", args.range, 0.5)?;

    let corpus = corpus::load_corpus(&args.corpus)?;
    let vocab = corpus::collect_vocab(&corpus);
    let table = embedding::random_embeddings_with_range(&vocab, dim, seed, range)?;
    embedding::save_embeddings(&table, &args.out)?;
    write_config_sidecar(
        &args.out,
        "gen-embeddings",
        json!({
            "corpus": args.corpus.display().to_string(),
            "embed_dim": dim,
            "seed": seed,
            "embed_range": range,
            "vocab_size": vocab.len(),
        }),
    )?;
    println!("wrote {}x{dim} embedding table to {}", vocab.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// split

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

fn split(args: SplitArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let spec = SplitSpec {
        train_fraction: cfg.f64("train_fraction", args.train_fraction, 0.75)?,
        seed: cfg.u64("seed", args.seed, 0)?,
    };
    let corpus = corpus::load_corpus(&args.corpus)?;
    let (train, test) = corpus::split(&corpus, &spec)?;
    corpus::save_corpus(&train, &args.train_out)?;
    corpus::save_corpus(&test, &args.test_out)?;
    let echo = json!({
        "corpus": args.corpus.display().to_string(),
        "train_fraction": spec.train_fraction,
        "seed": spec.seed,
    });
    write_config_sidecar(&args.train_out, "split", echo.clone())?;
    write_config_sidecar(&args.test_out, "split", echo)?;
    println!(
        "split {} documents into {} train / {} test",
        corpus.documents.len(),
        train.documents.len(),
        test.documents.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train-ssnn

#[derive(Args)]
struct TrainSsnnArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    /// Embedding file; the table is frozen during training.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    cnn1_kernels: Option<usize>,
    #[arg(long)]
    cnn1_width: Option<usize>,
    #[arg(long)]
    min_sentence_tokens: Option<usize>,
    #[arg(long)]
    cnn2_kernels: Option<usize>,
    #[arg(long)]
    cnn2_width: Option<usize>,
    #[arg(long)]
    dense_nodes: Option<usize>,
    /// `average` or `max1`.
    #[arg(long)]
    pooling: Option<String>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON training report (per-epoch mean losses).
    #[arg(long)]
    report: Option<PathBuf>,
}

fn resolve_ssnn_config(cfg: &RunConfig, args: &TrainSsnnArgs) -> Result<SsnnConfig> {
    let defaults = SsnnConfig::default();
    Ok(SsnnConfig {
        embed_dim: cfg.usize("embed_dim", args.embed_dim, defaults.embed_dim)?,
        cnn1_kernels: cfg.usize("cnn1_kernels", args.cnn1_kernels, defaults.cnn1_kernels)?,
        cnn1_width: cfg.usize("cnn1_width", args.cnn1_width, defaults.cnn1_width)?,
        min_sentence_tokens: cfg.usize(
            "min_sentence_tokens",
            args.min_sentence_tokens,
            defaults.min_sentence_tokens,
        )?,
        cnn2_kernels: cfg.usize("cnn2_kernels", args.cnn2_kernels, defaults.cnn2_kernels)?,
        cnn2_width: cfg.usize("cnn2_width", args.cnn2_width, defaults.cnn2_width)?,
        dense_nodes: cfg.usize("dense_nodes", args.dense_nodes, defaults.dense_nodes)?,
        pooling: cfg.pooling(args.pooling.clone(), defaults.pooling)?,
        learning_rate: cfg.f64("learning_rate", args.learning_rate, defaults.learning_rate)?,
        batch_size: cfg.usize("batch_size", args.batch_size, defaults.batch_size)?,
        epochs: cfg.usize("epochs", args.epochs, defaults.epochs)?,
        seed: cfg.u64("seed", args.seed, defaults.seed)?,
    })
}

fn train_ssnn(args: TrainSsnnArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let model_config = resolve_ssnn_config(&cfg, &args)?;

    let corpus = corpus::load_corpus(&args.corpus)?;
    let table = embedding::load_embeddings(&args.embeddings)?;
    let mut model = ssnn::build(&model_config, &corpus.domains)?;
    let report = ssnn::train(&mut model, &table, &corpus)?;
    ssnn::save_model(&model, &args.out)?;

    let echo = serde_json::to_value(&model_config)?;
    write_config_sidecar(&args.out, "train-ssnn", echo.clone())?;
    if let Some(report_path) = &args.report {
        fs::write(report_path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", report_path.display()))?;
        write_config_sidecar(report_path, "train-ssnn", echo)?;
    }

    let last = report.epochs.last().expect("at least one epoch");
    println!(
        "trained {} epochs on {} documents; final mean loss {:.4}; checkpoint {}",
        report.epochs.len(),
        corpus.documents.len(),
        last.mean_loss,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// predict

/// One line of a predictions file.
#[derive(Debug, Serialize, Deserialize)]
struct PredictionRecord {
    id: String,
    domain: String,
    /// Ground truth when known.
    label: Option<u8>,
    predicted_label: u8,
    /// Knowledgeable probability (network) or decision value (SVM).
    score: f64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// SSNN checkpoint (network mode; requires --corpus and --embeddings).
    #[arg(long, conflicts_with = "svm_model")]
    checkpoint: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    corpus: Option<PathBuf>,
    #[arg(long, requires = "checkpoint")]
    embeddings: Option<PathBuf>,
    /// SVM model file (baseline mode; requires --features).
    #[arg(long)]
    svm_model: Option<PathBuf>,
    #[arg(long, requires = "svm_model")]
    features: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn predict(args: PredictArgs) -> Result<()> {
    let records = match (&args.checkpoint, &args.svm_model) {
        (Some(checkpoint), None) => {
            let corpus_path = args.corpus.as_ref().context("--corpus is required with --checkpoint")?;
            let embeddings = args.embeddings.as_ref().context("--embeddings is required with --checkpoint")?;
            predict_ssnn(checkpoint, corpus_path, embeddings)?
        }
        (None, Some(model_path)) => {
            let features = args.features.as_ref().context("--features is required with --svm-model")?;
            predict_svm(model_path, features)?
        }
        _ => bail!("exactly one of --checkpoint or --svm-model must be given"),
    };

    let mut out = String::new();
    for record in &records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    write_config_sidecar(
        &args.out,
        "predict",
        json!({
            "checkpoint": args.checkpoint.as_ref().map(|p| p.display().to_string()),
            "svm_model": args.svm_model.as_ref().map(|p| p.display().to_string()),
            "corpus": args.corpus.as_ref().map(|p| p.display().to_string()),
            "features": args.features.as_ref().map(|p| p.display().to_string()),
        }),
    )?;
    println!("wrote {} predictions to {}", records.len(), args.out.display());
    Ok(())
}

fn predict_ssnn(checkpoint: &Path, corpus_path: &Path, embeddings: &Path) -> Result<Vec<PredictionRecord>> {
    let model = ssnn::load_model(checkpoint)?;
    let corpus = corpus::load_corpus(corpus_path)?;
    let table = embedding::load_embeddings(embeddings)?;
    corpus
        .documents
        .iter()
        .map(|doc| {
            let domain_idx = model.domain_index(&doc.domain)?;
            let (h, _) = model.forward(&table, doc, domain_idx)?;
            Ok(PredictionRecord {
                id: doc.id.clone(),
                domain: doc.domain.clone(),
                label: doc.label,
                predicted_label: u8::from(h > 0.5),
                score: h,
            })
        })
        .collect::<knowsnip::Result<Vec<_>>>()
        .map_err(Into::into)
}

fn predict_svm(model_path: &Path, features: &Path) -> Result<Vec<PredictionRecord>> {
    let model = featsvm::load_svm(model_path)?;
    let rows = featsvm::read_features_csv(features)?;
    Ok(rows
        .iter()
        .map(|row| {
            let score = model.decision(&row.features);
            PredictionRecord {
                id: row.id.clone(),
                domain: row.domain.clone(),
                label: row.label,
                predicted_label: u8::from(score > 0.0),
                score,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// annotate

#[derive(Args)]
struct AnnotateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// How many snippets to extract per document.
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn annotate(args: AnnotateArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let k = cfg.usize("top_k", args.top_k, 3)?;

    let model = ssnn::load_model(&args.checkpoint)?;
    let corpus = corpus::load_corpus(&args.corpus)?;
    let table = embedding::load_embeddings(&args.embeddings)?;

    let mut out = String::new();
    for doc in &corpus.documents {
        let domain_idx = model.domain_index(&doc.domain)?;
        let record = saliency::annotate(&model, &table, doc, domain_idx, k)?;
        out.push_str(&serde_json::to_string(&record)?);
        out.push('\n');
    }
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    write_config_sidecar(
        &args.out,
        "annotate",
        json!({
            "checkpoint": args.checkpoint.display().to_string(),
            "corpus": args.corpus.display().to_string(),
            "top_k": k,
        }),
    )?;
    println!("annotated {} documents to {}", corpus.documents.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// extract-features

#[derive(Args)]
struct ExtractFeaturesArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    /// Directory with the five lexicon files; built-in English lexicons
    /// when omitted.
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// POS tagset size k.
    #[arg(long)]
    pos_k: Option<usize>,
    /// Sliding-window length t.
    #[arg(long)]
    window_t: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn extract_features(args: ExtractFeaturesArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let defaults = PhsfConfig::default();
    let phsf_config = PhsfConfig {
        k: cfg.usize("pos_k", args.pos_k, defaults.k)?,
        t: cfg.usize("window_t", args.window_t, defaults.t)?,
    };
    let lexicons = match &args.lexicons {
        Some(dir) => Lexicons::load_dir(dir)?,
        None => Lexicons::english_defaults(),
    };

    let corpus = corpus::load_corpus(&args.corpus)?;
    let rows = featsvm::extract_corpus(&corpus, &phsf_config, &lexicons)?;
    featsvm::write_features_csv(&rows, &args.out)?;
    write_config_sidecar(
        &args.out,
        "extract-features",
        json!({
            "corpus": args.corpus.display().to_string(),
            "pos_k": phsf_config.k,
            "window_t": phsf_config.t,
            "lexicons": args.lexicons.as_ref().map(|p| p.display().to_string()),
        }),
    )?;
    println!(
        "wrote {} feature rows ({} columns) to {}",
        rows.len(),
        rows.first().map_or(0, |r| r.features.len()),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train-svm

#[derive(Args)]
struct TrainSvmArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    features: PathBuf,
    /// Hinge penalty coefficient.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Train one model per domain (files `<out>.<domain>`) instead of one
    /// pooled model.
    #[arg(long)]
    per_domain: bool,
    #[arg(long)]
    out: PathBuf,
}

fn train_svm(args: TrainSvmArgs) -> Result<()> {
    let cfg = load_run_config(&args.config)?;
    let c = cfg.f64("svm_c", args.c, 10.0)?;
    let seed = cfg.u64("seed", args.seed, 0)?;

    let rows = featsvm::read_features_csv(&args.features)?;
    let echo = json!({
        "features": args.features.display().to_string(),
        "svm_c": c,
        "seed": seed,
        "per_domain": args.per_domain,
    });

    let fit = |rows: &[&featsvm::FeatureRow]| -> Result<TrainedSvm> {
        let features: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
        let labels = rows
            .iter()
            .map(|r| r.label.with_context(|| format!("document {} is unlabeled", r.id)))
            .collect::<Result<Vec<u8>>>()?;
        Ok(TrainedSvm::fit(&features, &labels, c, seed)?)
    };

    if args.per_domain {
        let mut domains: Vec<String> = Vec::new();
        for row in &rows {
            if !domains.contains(&row.domain) {
                domains.push(row.domain.clone());
            }
        }
        for domain in &domains {
            let subset: Vec<&featsvm::FeatureRow> = rows.iter().filter(|r| &r.domain == domain).collect();
            let model = fit(&subset).with_context(|| format!("training domain {domain}"))?;
            let path = PathBuf::from(format!("{}.{domain}", args.out.display()));
            featsvm::save_svm(&model, &path)?;
            write_config_sidecar(&path, "train-svm", echo.clone())?;
            println!("wrote {domain} model ({} rows) to {}", subset.len(), path.display());
        }
    } else {
        let all: Vec<&featsvm::FeatureRow> = rows.iter().collect();
        let model = fit(&all)?;
        featsvm::save_svm(&model, &args.out)?;
        write_config_sidecar(&args.out, "train-svm", echo)?;
        println!("wrote pooled model ({} rows) to {}", rows.len(), args.out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Predictions JSONL as written by `predict`.
    #[arg(long)]
    predictions: PathBuf,
    /// Method name to stamp into the report rows.
    #[arg(long, default_value = "ssnn")]
    method: String,
    #[arg(long)]
    out: PathBuf,
    /// Also dump the pooled ROC curve as CSV.
    #[arg(long)]
    roc_csv: Option<PathBuf>,
}

fn eval_cmd(args: EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&args.predictions)
        .with_context(|| format!("reading {}", args.predictions.display()))?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let record: PredictionRecord = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: malformed prediction", args.predictions.display(), idx + 1))?;
        records.push(record);
    }
    if records.is_empty() {
        bail!("{}: no predictions", args.predictions.display());
    }

    let mut domains: Vec<String> = Vec::new();
    for r in &records {
        if !domains.contains(&r.domain) {
            domains.push(r.domain.clone());
        }
    }

    let evaluate = |subset: &[&PredictionRecord], dataset: &str| -> Result<MetricsReport> {
        let pairs = subset
            .iter()
            .map(|r| {
                let label = r.label.with_context(|| format!("document {} has no true label", r.id))?;
                Ok((r.predicted_label, label))
            })
            .collect::<Result<Vec<(u8, u8)>>>()?;
        let scored: Vec<ScoredPrediction> = subset
            .iter()
            .map(|r| ScoredPrediction {
                id: r.id.clone(),
                score: r.score,
                label: r.label.expect("checked above"),
            })
            .collect();
        Ok(MetricsReport {
            dataset: dataset.to_string(),
            method: args.method.clone(),
            accuracy: eval::accuracy(&pairs)?,
            auc: eval::auc(&scored)?,
            roc: eval::roc_curve(&scored)?,
        })
    };

    let mut reports = Vec::new();
    for domain in &domains {
        let subset: Vec<&PredictionRecord> = records.iter().filter(|r| &r.domain == domain).collect();
        reports.push(evaluate(&subset, domain).with_context(|| format!("evaluating domain {domain}"))?);
    }
    let all: Vec<&PredictionRecord> = records.iter().collect();
    reports.push(evaluate(&all, "pooled")?);

    fs::write(&args.out, serde_json::to_string_pretty(&reports)? + "\n")
        .with_context(|| format!("writing {}", args.out.display()))?;
    write_config_sidecar(
        &args.out,
        "eval",
        json!({
            "predictions": args.predictions.display().to_string(),
            "method": args.method,
        }),
    )?;
    if let Some(roc_path) = &args.roc_csv {
        let pooled = reports.last().expect("pooled row exists");
        fs::write(roc_path, eval::roc_to_csv(&pooled.roc))
            .with_context(|| format!("writing {}", roc_path.display()))?;
    }

    for report in &reports {
        println!(
            "{:>12}  accuracy {:.4}  auc {:.4}",
            report.dataset, report.accuracy, report.auc
        );
    }
    Ok(())
}
