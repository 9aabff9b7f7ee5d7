//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use vamci_cli::Cli;
use vamci_core::evaluation::{
    classification_metrics, nested_cv, outer_plans, regression_metrics, Aggregate, CvConfig, EvaluationReport,
};
use vamci_core::fusion::{session_features, FeatureMode};
use vamci_core::ingest::{preprocess, EmbeddingMatrix};
use vamci_core::intent::{intent_features, AnchorEntry, AnchorSet};
use vamci_core::learners::{train, Hyperparams, KnnParams, ModelKind, RidgeParams, Targets, TreeParams};
use vamci_core::model::DiagnosisLabel::{self, Hc, Mci};
use vamci_core::model::{MocaTarget, SpeechTask};
use vamci_core::rng::{stream, StreamRng};
use vamci_core::sim::{simulate_cohort, SimConfig, SimDims};
use vamci_core::Dataset;

#[path = "../../core/tests/support/mod.rs"]
mod support;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

// ---------- intent features ----------

/// Small integers produce exact cosine ties; Gaussians produce generic cases.
fn random_rows(rng: &mut StreamRng, rows: usize, d: usize, integer: bool) -> Vec<Vec<f32>> {
    (0..rows)
        .map(|_| loop {
            let r: Vec<f32> = (0..d)
                .map(|_| {
                    if integer {
                        rng.random_range(-2i32..=2) as f32
                    } else {
                        rng.sample::<f32, _>(StandardNormal)
                    }
                })
                .collect();
            if r.iter().any(|&v| v != 0.0) {
                break r;
            }
        })
        .collect()
}

fn anchor_set(rows: &[Vec<f32>], d: usize) -> AnchorSet {
    let entries = (0..rows.len())
        .map(|i| AnchorEntry {
            anchor_text: format!("anchor {i}"),
            intent_text: format!("intent {i}"),
            category: None,
        })
        .collect();
    AnchorSet::new(entries, EmbeddingMatrix::from_rows(d, rows).unwrap()).unwrap()
}

/// Direct transcription of the feature definition: each command goes to the
/// most similar anchor (first one on ties); QTY counts commands per anchor,
/// QLT averages their similarities (0 for an empty anchor).
fn brute_force_intent(anchors: &[Vec<f32>], commands: &[Vec<f32>]) -> (Vec<u32>, Vec<f64>) {
    let norm = |v: &[f32]| v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    let cos = |a: &[f32], b: &[f32]| {
        let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
        (dot / (norm(a) * norm(b))).clamp(-1.0, 1.0)
    };
    let n = anchors.len();
    let mut qty = vec![0u32; n];
    let mut sums = vec![0.0; n];
    for c in commands {
        let sims: Vec<f64> = anchors.iter().map(|a| cos(c, a)).collect();
        let mut best = 0;
        for i in 1..n {
            if sims[i] > sims[best] {
                best = i;
            }
        }
        qty[best] += 1;
        sums[best] += sims[best];
    }
    let qlt = (0..n).map(|i| if qty[i] == 0 { 0.0 } else { sums[i] / qty[i] as f64 }).collect();
    (qty, qlt)
}

fn intent_oracle() -> Check {
    let start = Instant::now();
    let mut rng = stream(101, &[]);
    let mut ties = 0;
    for case in 0..500 {
        let (m, n, d) = (rng.random_range(1..=8), rng.random_range(1..=5), rng.random_range(1..=4));
        let integer = case % 2 == 0;
        let anchors = random_rows(&mut rng, n, d, integer);
        let commands = random_rows(&mut rng, m, d, integer);
        let (qty, qlt) = brute_force_intent(&anchors, &commands);
        let got = intent_features::<f64>(&anchor_set(&anchors, d), &EmbeddingMatrix::from_rows(d, &commands).unwrap())
            .map_err(|e| e.to_string())?;
        ensure(got.qty == qty, || format!("case {case}: qty {:?} vs oracle {qty:?}", got.qty))?;
        for (i, (a, b)) in got.qlt.iter().zip(&qlt).enumerate() {
            ensure((a - b).abs() <= 1e-12, || format!("case {case} anchor {i}: qlt {a} vs oracle {b}"))?;
        }
        ties += usize::from(integer);
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("500 instances ({ties} tie-prone) in {:.2?}", start.elapsed()))
}

fn partition_invariant() -> Check {
    let mut rng = stream(102, &[]);
    for case in 0..1000 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=6);
        let mut anchors = random_rows(&mut rng, n, d, true);
        // Duplicate anchors and copy anchors into commands to force exact ties.
        if n > 1 && case % 2 == 0 {
            let src = rng.random_range(0..n);
            let dst = rng.random_range(0..n);
            anchors[dst] = anchors[src].clone();
        }
        let m = rng.random_range(1..=12);
        let mut commands = random_rows(&mut rng, m, d, case % 3 != 0);
        for c in commands.iter_mut() {
            if rng.random_bool(0.5) {
                *c = anchors[rng.random_range(0..n)].iter().map(|v| v * 2.0).collect();
            }
        }
        let f = intent_features::<f64>(&anchor_set(&anchors, d), &EmbeddingMatrix::from_rows(d, &commands).unwrap())
            .map_err(|e| e.to_string())?;
        let total: u32 = f.qty.iter().sum();
        ensure(total as usize == m, || format!("case {case}: sum qty {total} != m {m}"))?;
    }
    Ok("sum of QTY equals m on 1000 inputs".into())
}

// ---------- fusion ----------

fn fusion_dims() -> Check {
    let cfg = SimConfig {
        seed: 5,
        n_participants: 1,
        sessions_per_participant: 1,
        tasks: vec![SpeechTask::Generation],
        dims: SimDims {
            audio: 1024,
            textual: 768,
            sentence: 16,
        },
        ..Default::default()
    };
    let sim = simulate_cohort(&cfg).map_err(|e| e.to_string())?;
    let anchors = sim.anchors.len();
    ensure(anchors == 34, || format!("{anchors} anchors"))?;
    let session = preprocess(&sim.cohort.sessions()[0]).map_err(|e| e.to_string())?;
    let (i, a, t) = (2 * anchors, 1024, 768);
    let expected = [i, a, t, i + a, i + t, a + t, i + a + t];
    ensure(expected == [68, 1024, 768, 1092, 836, 1792, 1860], || format!("{expected:?}"))?;
    let mut widths = Vec::new();
    for (mode, want) in FeatureMode::ALL.into_iter().zip(expected) {
        let v = session_features::<f64>(&session, Some(&sim.anchors), mode).map_err(|e| e.to_string())?;
        ensure(v.dim() == want, || format!("{mode}: width {} != {want}", v.dim()))?;
        widths.push(v.dim());
    }
    Ok(format!("widths {widths:?}"))
}

// ---------- learners ----------

fn training_accuracy(data: &Dataset, params: Hyperparams) -> Result<f64, String> {
    let m = train(data, &params, 0).map_err(|e| e.to_string())?;
    let pred = m.predict(data.x()).map_err(|e| e.to_string())?;
    let (Targets::Labels(p), Targets::Labels(t)) = (pred, data.y()) else {
        return Err("expected labels".into());
    };
    Ok(p.iter().zip(t).filter(|(a, b)| a == b).count() as f64 / t.len() as f64)
}

fn learner_sanity() -> Check {
    let xor = Array2::from_shape_vec((4, 2), vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]).unwrap();
    let xor = Dataset::ungrouped(xor, Targets::Labels(vec![Hc, Mci, Mci, Hc])).unwrap();
    let acc = training_accuracy(&xor, Hyperparams::DecisionTree(TreeParams::default()))?;
    ensure(acc == 1.0, || format!("DT on XOR: {acc}"))?;

    let mut rng = stream(103, &[]);
    let x = Array2::from_shape_fn((60, 3), |_| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<DiagnosisLabel> = (0..60).map(|_| if rng.random_bool(0.5) { Mci } else { Hc }).collect();
    let data = Dataset::ungrouped(x, Targets::Labels(y)).unwrap();
    let acc = training_accuracy(&data, Hyperparams::Knn(KnnParams { k: 1 }))?;
    ensure(acc == 1.0, || format!("KNN k=1: {acc}"))?;

    let line = Array2::from_shape_vec((6, 1), vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]).unwrap();
    let line = Dataset::ungrouped(line, Targets::Labels(vec![Hc, Hc, Hc, Mci, Mci, Mci])).unwrap();
    let acc = training_accuracy(&line, ModelKind::LinearSvm.default_params())?;
    ensure(acc == 1.0, || format!("SVM on separable line: {acc}"))?;

    let x = Array2::from_shape_fn((25, 3), |_| rng.sample::<f64, _>(StandardNormal) * 2.0 - 1.0);
    let w_true = [0.75, -3.0, 2.5];
    let y: Vec<f64> = x.rows().into_iter().map(|r| support::dot(r.as_slice().unwrap(), &w_true) + 4.0).collect();
    let data = Dataset::ungrouped(x, Targets::Values(y)).unwrap();
    let m = train(&data, &Hyperparams::Ridge(RidgeParams { lambda: 0.0 }), 0).map_err(|e| e.to_string())?;
    let vamci_core::TrainedModel::Ridge(r) = m else {
        return Err("ridge expected".into());
    };
    let (w, b) = r.function.coefficients();
    let err = w.iter().zip(w_true).map(|(a, b)| (a - b).abs()).fold((b - 4.0).abs(), f64::max);
    ensure(err < 1e-8, || format!("ridge lambda=0 coefficient error {err:e}"))?;

    let mut worst: f64 = 0.0;
    let cases = [
        ("SVM", support::convex::svm_cases(&mut stream(104, &[]), 20)),
        ("SVR", support::convex::svr_cases(&mut stream(105, &[]), 20)),
    ];
    for (name, list) in cases {
        for (i, (ours, oracle)) in list.into_iter().enumerate() {
            let rel = (ours - oracle).abs() / oracle.abs().max(1e-12);
            ensure(rel <= 1e-4, || format!("{name} case {i}: ours {ours} oracle {oracle}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("XOR/KNN/SVM 100%, ridge err {err:.1e}, SVM/SVR worst rel gap {worst:.1e}"))
}

// ---------- cross-validation ----------

fn cv_integrity() -> Check {
    let mut rng = stream(106, &[]);
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    let mut p = 0;
    while groups.len() < 243 {
        let size = rng.random_range(1..=3).min(243 - groups.len());
        let label = if rng.random_bool(98.0 / 243.0) { Mci } else { Hc };
        for _ in 0..size {
            groups.push(format!("P{p:03}"));
            labels.push(label);
        }
        p += 1;
    }
    let x = Array2::from_shape_fn((243, 4), |_| rng.sample::<f64, _>(StandardNormal));
    let data = Dataset::new(x, Targets::Labels(labels), groups.clone()).unwrap();
    let cfg = CvConfig { seed: 9, ..Default::default() };

    for plan in outer_plans(&data, &cfg).map_err(|e| e.to_string())? {
        let mut seen = vec![0; 243];
        for f in 0..plan.k() {
            let test = plan.test(f);
            ensure((24..=25).contains(&test.len()), || format!("round {} fold {f}: size {}", plan.round, test.len()))?;
            test.iter().for_each(|&i| seen[i] += 1);
            let train = plan.train(f);
            ensure(train.len() + test.len() == 243, || "train/test do not partition".into())?;
            let test_groups: std::collections::BTreeSet<&str> = test.iter().map(|&i| groups[i].as_str()).collect();
            ensure(train.iter().all(|&i| !test_groups.contains(groups[i].as_str())), || {
                format!("round {} fold {f}: participant split across train and test", plan.round)
            })?;
        }
        ensure(seen.iter().all(|&c| c == 1), || format!("round {}: folds do not cover each index once", plan.round))?;
    }

    let grid = [Hyperparams::Knn(KnnParams { k: 1 }), Hyperparams::Knn(KnnParams { k: 5 })];
    let trials = nested_cv(&data, &grid, &cfg).map_err(|e| e.to_string())?;
    ensure(trials.len() == 100, || format!("{} trials", trials.len()))?;
    for t in &trials {
        let test: std::collections::BTreeSet<usize> = t.outer_test.iter().copied().collect();
        for (tr, va) in &t.inner_folds {
            ensure(tr.iter().chain(va).all(|i| !test.contains(i)), || {
                format!("round {} fold {}: inner fold touches outer test", t.round, t.fold)
            })?;
        }
    }
    Ok("10 rounds: sizes in {24,25}, disjoint, covering, grouped; 100 trials leak-free".into())
}

// ---------- pipeline runs ----------

fn run_cli(dir: &Path, args: &[&str]) -> Result<String, String> {
    let config = dir.join("run.toml");
    let mut argv = vec!["vamci".to_string(), "--config".into(), config.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let cli = Cli::try_parse_from(&argv).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    vamci_cli::run(&cli, &mut out).map_err(|e| format!("{args:?}: {e}"))?;
    Ok(String::from_utf8(out).unwrap())
}

fn pipeline(dir: &Path, config: &str, jobs: Option<usize>) -> Result<EvaluationReport, String> {
    fs::write(dir.join("run.toml"), config).map_err(|e| e.to_string())?;
    let jobs = jobs.map(|j| j.to_string());
    for step in ["simulate", "features", "evaluate", "report"] {
        match &jobs {
            Some(j) => run_cli(dir, &["--jobs", j, step])?,
            None => run_cli(dir, &[step])?,
        };
    }
    let bytes = fs::read(dir.join("out/report.json")).map_err(|e| e.to_string())?;
    EvaluationReport::from_json(&bytes).map_err(|e| e.to_string())
}

fn mean_accuracy(report: &EvaluationReport, task: SpeechTask, mode: FeatureMode, model: ModelKind) -> Result<f64, String> {
    report
        .cells
        .iter()
        .find_map(|c| match &c.aggregate {
            Aggregate::Classification { mean, .. }
                if c.task == task && c.mode == mode && c.model == model && c.target.is_none() =>
            {
                Some(mean.accuracy)
            }
            _ => None,
        })
        .ok_or_else(|| format!("no {task} {mode} {model} cell"))
}

fn mean_rrmse(report: &EvaluationReport, target: MocaTarget) -> Result<f64, String> {
    report
        .cells
        .iter()
        .find_map(|c| match &c.aggregate {
            Aggregate::Regression { mean, .. } if c.target == Some(target) => mean.rrmse,
            _ => None,
        })
        .ok_or_else(|| format!("no RRMSE for {target}"))
}

/// 40 participants × 5 sessions per task, 8-wide embeddings.
const COHORT: &str = r#"
[simulation]
n_participants = 40
sessions_per_participant = 5
mci_prevalence = 0.5
dims = { audio = 8, textual = 8, sentence = 8 }
"#;

fn null_cohort() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = format!(
        r#"seed = 11
tasks = ["generation"]
modes = ["INTENT", "FF4"]
models = ["DT", "RF", "KNN", "SVM"]
targets = []
{COHORT}tasks = ["generation"]
generation = {{ floor = 15, mean = 40.0, dispersion = 6.0, count_shift = 0.0, noise_shift = 0.0 }}
"#
    );
    let start = Instant::now();
    let report = pipeline(dir.path(), &config, None)?;
    let elapsed = start.elapsed();
    let mut parts = Vec::new();
    for mode in [FeatureMode::Intent, FeatureMode::Ff4] {
        for model in ModelKind::CLASSIFIERS {
            let acc = mean_accuracy(&report, SpeechTask::Generation, mode, model)?;
            ensure((0.42..=0.58).contains(&acc), || format!("{mode} {model}: mean accuracy {acc:.3} outside chance band"))?;
            parts.push(format!("{mode}/{model} {acc:.3}"));
        }
    }
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("{} in {elapsed:.1?}", parts.join(", ")))
}

fn planted_signal() -> Result<(Check, Check), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = format!(
        r#"seed = 12
modes = ["INTENT"]
models = ["RF", "LRR"]
targets = ["memory", "attention", "language"]
{COHORT}reading = {{ floor = 30, mean = 34.0, dispersion = 20.0, count_shift = 0.0, noise_shift = 0.0 }}
generation = {{ floor = 15, mean = 40.0, dispersion = 6.0, count_shift = 8.0, noise_shift = 0.3 }}
"#
    );
    let start = Instant::now();
    let report = pipeline(dir.path(), &config, None)?;
    let elapsed = start.elapsed();

    let planted = (|| {
        let gen = mean_accuracy(&report, SpeechTask::Generation, FeatureMode::Intent, ModelKind::RandomForest)?;
        let read = mean_accuracy(&report, SpeechTask::Reading, FeatureMode::Intent, ModelKind::RandomForest)?;
        ensure(gen >= 0.75, || format!("generation RF accuracy {gen:.3} < 0.75"))?;
        ensure(gen - read >= 0.10, || format!("generation {gen:.3} vs reading {read:.3}: gap below 0.10"))?;
        within(elapsed, Duration::from_secs(600))?;
        Ok(format!("generation {gen:.3}, reading {read:.3}, in {elapsed:.1?}"))
    })();
    let regression = (|| {
        let generation: Vec<_> = report.cells.iter().filter(|c| c.task == SpeechTask::Generation).cloned().collect();
        let report = EvaluationReport { cells: generation, ..report.clone() };
        let memory = mean_rrmse(&report, MocaTarget::Memory)?;
        let attention = mean_rrmse(&report, MocaTarget::Attention)?;
        let language = mean_rrmse(&report, MocaTarget::Language)?;
        ensure(memory < language && attention < language, || {
            format!("RRMSE memory {memory:.2}, attention {attention:.2}, language {language:.2}")
        })?;
        Ok(format!("ridge RRMSE memory {memory:.2}%, attention {attention:.2}% < language {language:.2}%"))
    })();
    Ok((planted, regression))
}

// ---------- metrics ----------

fn metric_oracles() -> Check {
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (n, t, p) in [(3, Mci, Mci), (1, Hc, Mci), (2, Mci, Hc), (4, Hc, Hc)] {
        truth.extend(std::iter::repeat_n(t, n));
        pred.extend(std::iter::repeat_n(p, n));
    }
    let m = classification_metrics(&truth, &pred, Mci).map_err(|e| e.to_string())?;
    ensure(m.accuracy == 0.7 && m.precision == 0.75 && m.recall == 0.6, || format!("{m:?}"))?;
    ensure(m.f1 == 2.0 * 0.75 * 0.6 / (0.75 + 0.6), || format!("f1 {}", m.f1))?;

    let r = regression_metrics(&[10.0, 12.0, 14.0], &[11.0, 11.0, 15.0]).map_err(|e| e.to_string())?;
    ensure(r.mae == 1.0 && r.rmse == 1.0 && r.rrmse == Some(100.0 / 12.0), || format!("{r:?}"))?;
    let r = regression_metrics(&[5.0], &[7.0]).map_err(|e| e.to_string())?;
    ensure(r.mae == 2.0 && r.rmse == 2.0 && r.rrmse == Some(40.0), || format!("{r:?}"))?;

    let mut rng = stream(107, &[]);
    for case in 0..1000 {
        let n = rng.random_range(1..=40);
        let t: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 10.0).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 10.0).collect();
        let r = regression_metrics(&t, &p).map_err(|e| e.to_string())?;
        ensure(r.mae <= r.rmse * (1.0 + 1e-12), || format!("case {case}: MAE {} > RMSE {}", r.mae, r.rmse))?;
    }
    Ok("fixed tables exact; MAE <= RMSE on 1000 vectors".into())
}

// ---------- determinism ----------

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Check {
    let config = r#"seed = 13
modes = ["INTENT", "FF4"]
models = ["DT", "RF", "KNN", "SVM", "LRR", "SVR"]
targets = ["total", "memory"]
[cv]
rounds = 2
k = 3
inner_k = 3
[grids]
RF = [{ n_trees = 10, max_depth = 3 }, { n_trees = 10 }]
[simulation]
n_participants = 12
sessions_per_participant = 3
mci_prevalence = 0.5
[simulation.dims]
audio = 6
textual = 5
sentence = 4
"#;
    let mut trees = Vec::new();
    for jobs in [1, 4, 1] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        pipeline(dir.path(), config, Some(jobs))?;
        trees.push(tree_bytes(dir.path()));
    }
    let files = trees[0].len();
    ensure(files > 20, || format!("only {files} files produced"))?;
    for (i, t) in trees.iter().enumerate().skip(1) {
        for (path, bytes) in &trees[0] {
            ensure(t.get(path) == Some(bytes), || format!("run {i}: {} differs", path.display()))?;
        }
        ensure(t.len() == files, || format!("run {i}: {} files vs {files}", t.len()))?;
    }
    Ok(format!("{files} files byte-identical across jobs=1, jobs=4 and a rerun"))
}

// ---------- driver ----------

fn guarded(f: impl FnOnce() -> Check) -> Check {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Check)> = vec![
        ("intent-feature oracle", guarded(intent_oracle)),
        ("partition invariant", guarded(partition_invariant)),
        ("fusion dims", guarded(fusion_dims)),
        ("learner sanity", guarded(learner_sanity)),
        ("cv integrity", guarded(cv_integrity)),
        ("metric oracles", guarded(metric_oracles)),
        ("null-cohort control", guarded(null_cohort)),
    ];
    match panic::catch_unwind(planted_signal) {
        Ok(Ok((planted, regression))) => {
            results.push(("planted-signal recovery", planted));
            results.push(("regression direction", regression));
        }
        Ok(Err(e)) => {
            results.push(("planted-signal recovery", Err(e.clone())));
            results.push(("regression direction", Err(e)));
        }
        Err(_) => {
            results.push(("planted-signal recovery", Err("panicked".into())));
            results.push(("regression direction", Err("panicked".into())));
        }
    }
    results.push(("determinism", guarded(determinism)));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
