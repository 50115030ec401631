//! Acceptance suite: every release criterion as one test, each printing a
//! pass/fail line (run with `--nocapture` or `--show-output` to see them).
//!
//! The suite leans on independent oracles throughout: central finite
//! differences for gradients and saliency scores, a brute-force window
//! enumerator for the POS histogram features, and the O(n^2) pairwise rank
//! statistic for AUC.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use knowsnip::corpus::{
    collect_vocab, domain_minibatches, gen_synthetic, sentence_is_planted, split, Corpus, Document,
    SplitSpec,
};
use knowsnip::embedding::{random_embeddings_with_range, EmbeddingTable};
use knowsnip::eval::{accuracy, auc, roc_curve, MetricsReport, ScoredPrediction};
use knowsnip::featsvm::{extract_corpus, phsf, PhsfConfig, TrainedSvm};
use knowsnip::lexicons::Lexicons;
use knowsnip::netops::Pooling;
use knowsnip::saliency::score_sentences;
use knowsnip::ssnn::{
    build, count_params, model_to_bytes, saving_ratio, train, SsnnConfig, SsnnModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn within_budget(start: Instant, budget: Duration, criterion: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= budget,
        "{criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

/// rel 1e-4 with an absolute floor of 1e-6.
fn grad_close(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= 1e-6 || diff / analytic.abs().max(numeric.abs()) <= 1e-4
}

// ---------------------------------------------------------------------------
// criterion 1: saving-ratio reproduction

#[test]
fn c01_saving_ratio_reproduction() {
    let start = Instant::now();
    let domains: Vec<String> = ["auto", "finance", "re"].map(String::from).to_vec();
    let model = build(&SsnnConfig::default(), &domains).unwrap();
    let pc = count_params(&model);
    let r = saving_ratio(&pc).unwrap();

    let closed_form = (1.0 - 1.0 / 3.0) * pc.n_low as f64 / ((pc.n_low + pc.n_high) as f64);
    let pass = (0.66..=0.6667).contains(&r)
        && (r - closed_form).abs() <= 1e-15
        && (r - 0.6667).abs() <= 0.01
        && pc.n_low == 51_670
        && pc.n_high == 22;
    report(
        "C1 saving-ratio reproduction",
        pass,
        &format!("r = {r:.6}, n_low = {}, n_high = {}", pc.n_low, pc.n_high),
    );
    within_budget(start, Duration::from_secs(1), "C1");
}

// ---------------------------------------------------------------------------
// criteria 2-3: gradient suites on the reduced model

fn reduced_config(seed: u64) -> SsnnConfig {
    SsnnConfig {
        embed_dim: 8,
        cnn1_kernels: 4,
        cnn1_width: 2,
        min_sentence_tokens: 2,
        cnn2_kernels: 3,
        cnn2_width: 2,
        dense_nodes: 3,
        pooling: Pooling::Average,
        learning_rate: 0.1,
        batch_size: 4,
        epochs: 1,
        seed,
    }
}

fn reduced_table(seed: u64) -> EmbeddingTable {
    let vocab: Vec<String> = (0..16).map(|i| format!("t{i}")).collect();
    random_embeddings_with_range(&vocab, 8, seed, 0.5).unwrap()
}

fn random_reduced_doc(rng: &mut ChaCha8Rng, lens: &[usize]) -> Document {
    Document {
        id: "doc".into(),
        domain: "a".into(),
        label: Some(1),
        title_tokens: vec![],
        sentences: lens
            .iter()
            .map(|&len| (0..len).map(|_| format!("t{}", rng.gen_range(0..16))).collect())
            .collect(),
        pos_tags: None,
        paragraphs: None,
    }
}

#[test]
fn c02_gradient_suite() {
    let start = Instant::now();
    let domains: Vec<String> = ["a", "b"].map(String::from).to_vec();
    let mut checked = 0usize;
    let mut failures = 0usize;

    for seed in 0..5u64 {
        let model = build(&reduced_config(seed), &domains).unwrap();
        let table = reduced_table(seed + 50);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let doc = random_reduced_doc(&mut rng, &[3, 4, 3]);
        let domain = (seed % 2) as usize;
        let y = (seed % 2) as u8;

        let (_, tape) = model.forward(&table, &doc, domain).unwrap();
        let (grads, _) = model.backprop(tape, y).unwrap();
        let mut analytic = Vec::new();
        grads.cnn1.for_each(&mut |v| analytic.push(v));
        grads.cnn2.for_each(&mut |v| analytic.push(v));
        grads.dense.for_each(&mut |v| analytic.push(v));
        for (i, head) in model.heads.iter().enumerate() {
            if i == domain {
                grads.head.for_each(&mut |v| analytic.push(v));
            } else {
                analytic.extend(std::iter::repeat(0.0).take(head.param_count()));
            }
        }

        let base = model.params_vec();
        let h = 1e-4;
        let mut probe = model.clone();
        for i in 0..base.len() {
            let mut plus = base.clone();
            plus[i] += h;
            probe.set_params_vec(&plus).unwrap();
            let loss_plus = probe.loss(&table, &doc, domain, y).unwrap();
            let mut minus = base.clone();
            minus[i] -= h;
            probe.set_params_vec(&minus).unwrap();
            let loss_minus = probe.loss(&table, &doc, domain, y).unwrap();
            let numeric = (loss_plus - loss_minus) / (2.0 * h);
            checked += 1;
            if !grad_close(analytic[i], numeric) {
                failures += 1;
            }
        }
    }

    report(
        "C2 gradient suite (reduced model, 5 seeds)",
        failures == 0,
        &format!("{checked} parameters checked, {failures} failures"),
    );
    within_budget(start, Duration::from_secs(30), "C2");
}

#[test]
fn c03_saliency_matches_finite_differences() {
    let start = Instant::now();
    let config = reduced_config(11);
    let model = build(&config, &["a".to_string()]).unwrap();
    let table = reduced_table(12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);

    let mut checked = 0usize;
    let mut failures = 0usize;
    for d in 0..20 {
        let n_sentences = rng.gen_range(1..=5);
        let lens: Vec<usize> = (0..n_sentences).map(|_| rng.gen_range(2..=6)).collect();
        let doc = random_reduced_doc(&mut rng, &lens);

        let (h, _) = model.forward(&table, &doc, 0).unwrap();
        let pseudo = 1 - u8::from(h > 0.5);
        let scores = score_sentences(&model, &table, &doc, 0).unwrap();
        let (s, eligible, _) = model.forward(&table, &doc, 0).unwrap().1.into_sentence_stage();

        let step = 1e-4;
        for (col, &idx) in eligible.iter().enumerate() {
            let loss_scaled = |scale: f64| {
                let mut scaled = s.clone();
                for v in scaled.column_mut(col) {
                    *v *= scale;
                }
                let (_, upper) = model.forward_from_sentences(&scaled, 0).unwrap();
                upper.loss(pseudo).unwrap()
            };
            let numeric = (loss_scaled(1.0 + step) - loss_scaled(1.0 - step)) / (2.0 * step);
            let analytic = scores[idx].raw_derivative.unwrap();
            checked += 1;
            if !grad_close(analytic, numeric) {
                failures += 1;
                eprintln!("doc {d} sentence {idx}: analytic {analytic}, numeric {numeric}");
            }
        }
    }

    report(
        "C3 saliency finite-difference oracle (20 documents)",
        failures == 0,
        &format!("{checked} sentence derivatives checked, {failures} failures"),
    );
    within_budget(start, Duration::from_secs(30), "C3");
}

// ---------------------------------------------------------------------------
// criterion 4: head isolation under mixed-domain training

#[test]
fn c04_head_isolation_audit() {
    let start = Instant::now();
    let corpus = gen_synthetic(3, 30, 300, 41).unwrap();
    let vocab = collect_vocab(&corpus);
    let config = SsnnConfig {
        batch_size: 5,
        epochs: 3,
        seed: 41,
        ..SsnnConfig::default()
    };
    let table = random_embeddings_with_range(&vocab, config.embed_dim, 41, 0.5).unwrap();
    let mut model = build(&config, &corpus.domains).unwrap();

    let snapshot = |model: &SsnnModel| -> Vec<Vec<u64>> {
        model
            .heads
            .iter()
            .map(|h| {
                let mut bits = Vec::new();
                h.for_each_param(&mut |v| bits.push(v.to_bits()));
                bits
            })
            .collect()
    };

    // updater log: for every batch, which heads changed bit-wise
    let mut log: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.epochs {
        let epoch_seed: u64 = rng.gen();
        for (domain_idx, docs) in domain_minibatches(&corpus, config.batch_size, epoch_seed).unwrap() {
            let before = snapshot(&model);
            model.train_batch(&table, &docs, domain_idx).unwrap();
            let after = snapshot(&model);
            let changed: Vec<usize> = (0..model.heads.len())
                .filter(|&q| before[q] != after[q])
                .collect();
            log.push((domain_idx, changed));
        }
    }

    let violations: Vec<&(usize, Vec<usize>)> =
        log.iter().filter(|(q, changed)| changed != &vec![*q]).collect();
    report(
        "C4 head isolation (3 epochs, bit-level audit)",
        violations.is_empty(),
        &format!("{} batches audited, {} violations", log.len(), violations.len()),
    );
    within_budget(start, Duration::from_secs(60), "C4");
}

// ---------------------------------------------------------------------------
// criteria 5, 6, 10: the desk-scale pipeline

const PIPELINE_SEED: u64 = 7;

struct Pipeline {
    corpus: Corpus,
    train_set: Corpus,
    test_set: Corpus,
    table: EmbeddingTable,
    model: SsnnModel,
    checkpoint: Vec<u8>,
    metrics_json: String,
    train_acc_per_domain: Vec<f64>,
    test_acc_per_domain: Vec<f64>,
    pooled_test_auc: f64,
}

fn run_pipeline() -> Pipeline {
    let corpus = gen_synthetic(3, 200, 600, PIPELINE_SEED).unwrap();
    let (train_set, test_set) = split(
        &corpus,
        &SplitSpec {
            train_fraction: 0.75,
            seed: PIPELINE_SEED,
        },
    )
    .unwrap();
    let vocab = collect_vocab(&corpus);
    let config = SsnnConfig {
        seed: PIPELINE_SEED,
        ..SsnnConfig::default()
    };
    let table = random_embeddings_with_range(&vocab, config.embed_dim, PIPELINE_SEED, 0.5).unwrap();
    let mut model = build(&config, &corpus.domains).unwrap();
    train(&mut model, &table, &train_set).unwrap();

    let acc_per_domain = |set: &Corpus| -> Vec<f64> {
        set.domains
            .iter()
            .map(|domain| {
                let q = model.domain_index(domain).unwrap();
                let pairs: Vec<(u8, u8)> = set
                    .documents
                    .iter()
                    .filter(|d| &d.domain == domain)
                    .map(|d| (model.predict(&table, d, q).unwrap(), d.label.unwrap()))
                    .collect();
                accuracy(&pairs).unwrap()
            })
            .collect()
    };
    let train_acc_per_domain = acc_per_domain(&train_set);
    let test_acc_per_domain = acc_per_domain(&test_set);

    let scored: Vec<ScoredPrediction> = test_set
        .documents
        .iter()
        .map(|d| {
            let q = model.domain_index(&d.domain).unwrap();
            ScoredPrediction {
                id: d.id.clone(),
                score: model.forward(&table, d, q).unwrap().0,
                label: d.label.unwrap(),
            }
        })
        .collect();
    let pooled_test_auc = auc(&scored).unwrap();

    // per-domain rows plus the pooled row, as the evaluation protocol lays out
    let mut reports = Vec::new();
    for domain in &test_set.domains {
        let subset: Vec<ScoredPrediction> = scored
            .iter()
            .zip(&test_set.documents)
            .filter(|(_, d)| &d.domain == domain)
            .map(|(s, _)| s.clone())
            .collect();
        let pairs: Vec<(u8, u8)> = subset
            .iter()
            .map(|s| (u8::from(s.score > 0.5), s.label))
            .collect();
        reports.push(MetricsReport {
            dataset: domain.clone(),
            method: "ssnn_avg".to_string(),
            accuracy: accuracy(&pairs).unwrap(),
            auc: auc(&subset).unwrap(),
            roc: roc_curve(&subset).unwrap(),
        });
    }
    let pooled_pairs: Vec<(u8, u8)> = scored
        .iter()
        .map(|s| (u8::from(s.score > 0.5), s.label))
        .collect();
    reports.push(MetricsReport {
        dataset: "pooled".to_string(),
        method: "ssnn_avg".to_string(),
        accuracy: accuracy(&pooled_pairs).unwrap(),
        auc: pooled_test_auc,
        roc: roc_curve(&scored).unwrap(),
    });

    Pipeline {
        checkpoint: model_to_bytes(&model),
        metrics_json: serde_json::to_string_pretty(&reports).unwrap(),
        corpus,
        train_set,
        test_set,
        table,
        model,
        train_acc_per_domain,
        test_acc_per_domain,
        pooled_test_auc,
    }
}

fn pipeline() -> &'static Pipeline {
    static PIPELINE: OnceLock<Pipeline> = OnceLock::new();
    PIPELINE.get_or_init(run_pipeline)
}

#[test]
fn c05_desk_scale_learning() {
    let start = Instant::now();
    let p = pipeline();
    let pass = p.train_acc_per_domain.iter().all(|&a| a >= 0.95)
        && p.test_acc_per_domain.iter().all(|&a| a >= 0.90)
        && p.pooled_test_auc >= 0.95;
    report(
        "C5 desk-scale learning (3x200 docs, default hyperparameters)",
        pass,
        &format!(
            "train acc {:?}, held-out acc {:?}, pooled AUC {:.4}",
            p.train_acc_per_domain, p.test_acc_per_domain, p.pooled_test_auc
        ),
    );
    within_budget(start, Duration::from_secs(300), "C5");
}

#[test]
fn c06_saliency_separates_planted_sentences() {
    let start = Instant::now();
    let p = pipeline();

    let mut predicted_knowledgeable = 0usize;
    let mut planted_sum = 0.0;
    let mut planted_n = 0usize;
    let mut filler_sum = 0.0;
    let mut filler_n = 0usize;
    for doc in &p.corpus.documents {
        let q = p.model.domain_index(&doc.domain).unwrap();
        if p.model.predict(&p.table, doc, q).unwrap() != 1 {
            continue;
        }
        predicted_knowledgeable += 1;
        for score in score_sentences(&p.model, &p.table, doc, q).unwrap() {
            let Some(value) = score.knowledgeable_score else {
                continue;
            };
            if sentence_is_planted(&doc.sentences[score.sentence_index]) {
                planted_sum += value;
                planted_n += 1;
            } else {
                filler_sum += value;
                filler_n += 1;
            }
        }
    }

    let planted_mean = planted_sum / planted_n as f64;
    let filler_mean = filler_sum / filler_n as f64;
    let pass = predicted_knowledgeable >= 100 && filler_n > 0 && planted_mean > filler_mean;
    report(
        "C6 saliency usefulness (planted vs filler sentences)",
        pass,
        &format!(
            "{predicted_knowledgeable} documents predicted knowledgeable; mean score planted {planted_mean:.5} vs filler {filler_mean:.5}"
        ),
    );
    within_budget(start, Duration::from_secs(120), "C6");
}

#[test]
fn c10_pipeline_is_byte_deterministic() {
    let first = pipeline();
    let second = run_pipeline();
    let pass = first.checkpoint == second.checkpoint && first.metrics_json == second.metrics_json;
    report(
        "C10 determinism (criterion-5 pipeline repeated)",
        pass,
        &format!(
            "checkpoint {} bytes {}, metrics report {}",
            first.checkpoint.len(),
            if first.checkpoint == second.checkpoint { "identical" } else { "DIFFER" },
            if first.metrics_json == second.metrics_json { "identical" } else { "DIFFER" },
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: PHSF against the brute-force window enumerator

#[test]
fn c07_phsf_window_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut checked = 0usize;
    let mut failures = 0usize;

    for case in 0..50 {
        let k = 5;
        let len = rng.gen_range(1..=40);
        let tags: Vec<usize> = (0..len).map(|_| rng.gen_range(0..k)).collect();
        let t = if case % 2 == 0 { 2 } else { 15 };
        let config = PhsfConfig { k, t };

        let fast = phsf(&tags, &config);

        // independent enumerator: materialize every window, count, then take
        // mean and population variance the long way
        let windows: Vec<&[usize]> = if len >= t {
            (0..=len - t).map(|s| &tags[s..s + t]).collect()
        } else {
            vec![&tags[..]]
        };
        for tag in 0..k {
            let counts: Vec<f64> = windows
                .iter()
                .map(|w| w.iter().filter(|&&x| x == tag).count() as f64)
                .collect();
            let mean = counts.iter().sum::<f64>() / counts.len() as f64;
            let variance =
                counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / counts.len() as f64;
            checked += 2;
            if (fast[2 * tag] - mean).abs() > 1e-12 || (fast[2 * tag + 1] - variance).abs() > 1e-12 {
                failures += 1;
            }
        }
    }

    report(
        "C7 PHSF window-enumerator oracle (50 sequences)",
        failures == 0,
        &format!("{checked} statistics compared, {failures} failures"),
    );
    within_budget(start, Duration::from_secs(5), "C7");
}

// ---------------------------------------------------------------------------
// criterion 8: the SVM baseline

#[test]
fn c08_svm_baseline() {
    let start = Instant::now();

    // (a) linearly separable feature sets: centers +-1.5 with +-0.4 box
    // noise give a geometric margin of 1.1 >= 0.5
    let mut separable_ok = true;
    for seed in [81u64, 82, 83] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 160;
        let mut features = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i % 2) as u8;
            let center = if label == 1 { 1.5 } else { -1.5 };
            let mut row: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.4..0.4)).collect();
            row[0] += center;
            features.push(row);
            labels.push(label);
        }
        let model = TrainedSvm::fit(&features, &labels, 10.0, seed).unwrap();
        let correct = features
            .iter()
            .zip(&labels)
            .filter(|(x, &y)| model.predict(x) == y)
            .count();
        if correct != n {
            separable_ok = false;
            eprintln!("seed {seed}: {correct}/{n} correct");
        }
    }

    // (b) held-out accuracy on the synthetic corpus's hand-crafted features
    let p = pipeline();
    let lexicons = Lexicons::english_defaults();
    let config = PhsfConfig::default();
    let train_rows = extract_corpus(&p.train_set, &config, &lexicons).unwrap();
    let test_rows = extract_corpus(&p.test_set, &config, &lexicons).unwrap();
    let features: Vec<Vec<f64>> = train_rows.iter().map(|r| r.features.clone()).collect();
    let labels: Vec<u8> = train_rows.iter().map(|r| r.label.unwrap()).collect();
    let model = TrainedSvm::fit(&features, &labels, 10.0, 84).unwrap();
    let pairs: Vec<(u8, u8)> = test_rows
        .iter()
        .map(|r| (model.predict(&r.features), r.label.unwrap()))
        .collect();
    let held_out = accuracy(&pairs).unwrap();

    let pass = separable_ok && held_out >= 0.9;
    report(
        "C8 SVM baseline (separable sets + hand-crafted features)",
        pass,
        &format!("separable sets all 100%: {separable_ok}, held-out accuracy {held_out:.4}"),
    );
    within_budget(start, Duration::from_secs(60), "C8");
}

// ---------------------------------------------------------------------------
// criterion 9: AUC dual computation

#[test]
fn c09_auc_dual_computation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut worst: f64 = 0.0;
    let mut sets = 0usize;

    while sets < 100 {
        let n = rng.gen_range(4..=80);
        let discrete = rng.gen_bool(0.5);
        let preds: Vec<ScoredPrediction> = (0..n)
            .map(|i| ScoredPrediction {
                id: format!("p{i}"),
                score: if discrete {
                    // coarse grid forces plenty of ties
                    rng.gen_range(0..5) as f64 / 5.0
                } else {
                    rng.gen_range(-1.0..1.0)
                },
                label: u8::from(rng.gen_bool(0.5)),
            })
            .collect();
        let positives = preds.iter().filter(|p| p.label == 1).count();
        if positives == 0 || positives == preds.len() {
            continue;
        }
        sets += 1;

        let trapezoid = auc(&preds).unwrap();
        let pos: Vec<f64> = preds.iter().filter(|p| p.label == 1).map(|p| p.score).collect();
        let neg: Vec<f64> = preds.iter().filter(|p| p.label == 0).map(|p| p.score).collect();
        let mut wins = 0.0;
        for &a in &pos {
            for &b in &neg {
                if a > b {
                    wins += 1.0;
                } else if a == b {
                    wins += 0.5;
                }
            }
        }
        let rank = wins / (pos.len() * neg.len()) as f64;
        worst = worst.max((trapezoid - rank).abs());
    }

    report(
        "C9 AUC trapezoid vs pairwise rank statistic (100 sets)",
        worst <= 1e-12,
        &format!("max |difference| = {worst:.2e}"),
    );
    within_budget(start, Duration::from_secs(5), "C9");
}
