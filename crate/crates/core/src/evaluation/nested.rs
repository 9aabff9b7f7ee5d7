use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{train, Dataset, Hyperparams, ModelKind, Targets};
use crate::model::DiagnosisLabel;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

use super::folds::{make_outer_folds, FoldPlan};
use super::metrics::{classification_metrics, regression_metrics, ClassificationMetrics, RegressionMetrics};

const TRIAL_STREAM: u64 = 0x7121;
const INNER_STREAM: u64 = 0x1AAE;
const REFIT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub rounds: usize,
    pub k: usize,
    pub inner_k: usize,
    pub positive: DiagnosisLabel,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            rounds: 10,
            k: 10,
            inner_k: 5,
            positive: DiagnosisLabel::Mci,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be positive".into()));
        }
        if self.k < 2 || self.inner_k < 2 {
            return Err(Error::Config("k and inner_k must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TrialMetrics {
    Classification(ClassificationMetrics),
    Regression(RegressionMetrics),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub round: usize,
    pub fold: usize,
    pub model: ModelKind,
    pub chosen: Hyperparams,
    /// Mean inner score per grid point (accuracy or RMSE); absent when the
    /// grid point failed to fit on some inner fold.
    pub inner_scores: Vec<Option<f64>>,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: TrialMetrics,
    #[serde(skip)]
    pub outer_train: Vec<usize>,
    #[serde(skip)]
    pub outer_test: Vec<usize>,
    /// `(train, validation)` per inner fold, as indices into the full dataset.
    #[serde(skip)]
    pub inner_folds: Vec<(Vec<usize>, Vec<usize>)>,
}

fn stratify<T: Scalar>(y: &Targets<T>) -> Option<&[DiagnosisLabel]> {
    y.labels()
}

/// Outer fold plans, one per round.
pub fn outer_plans<T: Scalar>(data: &Dataset<T>, cfg: &CvConfig) -> Result<Vec<FoldPlan>> {
    cfg.validate()?;
    (0..cfg.rounds)
        .map(|r| make_outer_folds(data.groups(), stratify(data.y()), cfg.k, r, cfg.seed))
        .collect()
}

fn check_grid(grid: &[Hyperparams]) -> Result<ModelKind> {
    let first = grid.first().ok_or(Error::Empty("hyperparameter grid"))?;
    if grid.iter().any(|g| g.kind() != first.kind()) {
        return Err(Error::Config("grid mixes model kinds".into()));
    }
    grid.iter().try_for_each(Hyperparams::validate)?;
    Ok(first.kind())
}

fn score(truth: &Targets<impl Scalar>, pred: &Targets<impl Scalar>, positive: DiagnosisLabel) -> Result<TrialMetrics> {
    match (truth, pred) {
        (Targets::Labels(t), Targets::Labels(p)) => classification_metrics(t, p, positive).map(TrialMetrics::Classification),
        (Targets::Values(t), Targets::Values(p)) => {
            let t: Vec<f64> = t.iter().map(|v| v.as_f64()).collect();
            let p: Vec<f64> = p.iter().map(|v| v.as_f64()).collect();
            regression_metrics(&t, &p).map(TrialMetrics::Regression)
        }
        _ => Err(Error::Config("prediction type does not match targets".into())),
    }
}

/// Runs one outer trial: inner-CV selection on the outer-train part of
/// `plan`, refit, and scoring on fold `fold`.
///
/// Every random choice comes from `(cfg.seed, round, fold)`, so trials can be
/// executed in any order or concurrently.
pub fn run_trial<T: Scalar>(
    data: &Dataset<T>,
    grid: &[Hyperparams],
    cfg: &CvConfig,
    plan: &FoldPlan,
    fold: usize,
) -> Result<TrialResult> {
    let kind = check_grid(grid)?;
    let outer_train = plan.train(fold);
    let outer_test = plan.test(fold).to_vec();
    let trial_seed = derive_seed(cfg.seed, &[TRIAL_STREAM, plan.round as u64, fold as u64]);
    let train_set = data.subset(&outer_train);

    let inner_groups = {
        let mut g = train_set.groups().to_vec();
        g.sort();
        g.dedup();
        g.len()
    };
    let inner_k = cfg.inner_k.min(inner_groups);
    let inner = make_outer_folds(
        train_set.groups(),
        stratify(train_set.y()),
        inner_k,
        0,
        derive_seed(trial_seed, &[INNER_STREAM]),
    )?;
    let inner_folds: Vec<(Vec<usize>, Vec<usize>)> = (0..inner.k())
        .map(|f| {
            let map = |idx: &[usize]| idx.iter().map(|&i| outer_train[i]).collect::<Vec<_>>();
            (map(&inner.train(f)), map(inner.test(f)))
        })
        .collect();
    // Leakage guard: inner train and validation must come from outer train.
    let mut in_test = vec![false; data.len()];
    outer_test.iter().for_each(|&i| in_test[i] = true);
    for (tr, va) in &inner_folds {
        if let Some(&i) = tr.iter().chain(va).find(|&&i| in_test[i]) {
            return Err(Error::Leakage(i));
        }
    }

    let classification = data.y().is_classification();
    let mut inner_scores = Vec::with_capacity(grid.len());
    let mut first_error = None;
    for (g, params) in grid.iter().enumerate() {
        let mut total = 0.0;
        let mut ok = true;
        for (f, (tr, va)) in inner_folds.iter().enumerate() {
            let seed = derive_seed(trial_seed, &[g as u64, f as u64]);
            let fitted = train(&data.subset(tr), params, seed).and_then(|m| {
                let val = data.subset(va);
                let pred = m.predict(val.x())?;
                score(val.y(), &pred, cfg.positive)
            });
            match fitted {
                Ok(TrialMetrics::Classification(m)) => total += m.accuracy,
                Ok(TrialMetrics::Regression(m)) => total += m.rmse,
                Err(e) => {
                    log::debug!("{kind} {} failed on inner fold {f}: {e}", params.describe());
                    first_error.get_or_insert(e);
                    ok = false;
                    break;
                }
            }
        }
        inner_scores.push(ok.then(|| total / inner_folds.len() as f64));
    }
    let better = |a: f64, b: f64| if classification { a > b } else { a < b };
    let mut best: Option<(usize, f64)> = None;
    for (g, s) in inner_scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| better(s, b)) {
                best = Some((g, s));
            }
        }
    }
    let Some((chosen, _)) = best else {
        return Err(first_error.unwrap_or(Error::Empty("hyperparameter grid")));
    };

    let model = train(&train_set, &grid[chosen], derive_seed(trial_seed, &[REFIT]))?;
    let test_set = data.subset(&outer_test);
    let pred = model.predict(test_set.x())?;
    let metrics = score(test_set.y(), &pred, cfg.positive)?;
    Ok(TrialResult {
        round: plan.round,
        fold,
        model: kind,
        chosen: grid[chosen],
        inner_scores,
        n_train: outer_train.len(),
        n_test: outer_test.len(),
        metrics,
        outer_train,
        outer_test,
        inner_folds,
    })
}

/// All `rounds × k` trials in round-major order.
pub fn nested_cv<T: Scalar>(data: &Dataset<T>, grid: &[Hyperparams], cfg: &CvConfig) -> Result<Vec<TrialResult>> {
    check_grid(grid)?;
    let plans = outer_plans(data, cfg)?;
    let mut out = Vec::with_capacity(cfg.rounds * cfg.k);
    for plan in &plans {
        for fold in 0..plan.k() {
            out.push(run_trial(data, grid, cfg, plan, fold)?);
        }
    }
    Ok(out)
}
