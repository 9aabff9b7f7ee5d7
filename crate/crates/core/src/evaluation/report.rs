use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FeatureMode;
use crate::learners::ModelKind;
use crate::model::{MocaTarget, SpeechTask};

use super::metrics::{ClassificationMetrics, RegressionMetrics};
use super::nested::{CvConfig, TrialMetrics, TrialResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionSummary {
    pub mae: f64,
    pub rmse: f64,
    pub rrmse: Option<f64>,
}

/// Mean over trials and best single trial (max for scores, min for errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Aggregate {
    Classification {
        mean: ClassificationSummary,
        best: ClassificationSummary,
    },
    Regression {
        mean: RegressionSummary,
        best: RegressionSummary,
    },
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn fold_max(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(f64::NEG_INFINITY, f64::max)
}

fn fold_min(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(f64::INFINITY, f64::min)
}

pub fn aggregate_trials(trials: &[TrialResult]) -> Result<Aggregate> {
    let metrics: Vec<TrialMetrics> = trials.iter().map(|t| t.metrics).collect();
    aggregate_metrics(&metrics)
}

pub fn aggregate_metrics(metrics: &[TrialMetrics]) -> Result<Aggregate> {
    let Some(first) = metrics.first() else {
        return Err(Error::Empty("trial list"));
    };
    match first {
        TrialMetrics::Classification(_) => {
            let c: Vec<&ClassificationMetrics> = metrics
                .iter()
                .map(|m| match m {
                    TrialMetrics::Classification(c) => Ok(c),
                    TrialMetrics::Regression(_) => Err(Error::Config("mixed trial kinds".into())),
                })
                .collect::<Result<_>>()?;
            type Field = fn(&ClassificationMetrics) -> f64;
            let summary = |f: fn(&[&ClassificationMetrics], Field) -> f64| {
                ClassificationSummary {
                    accuracy: f(&c, |m| m.accuracy),
                    precision: f(&c, |m| m.precision),
                    recall: f(&c, |m| m.recall),
                    f1: f(&c, |m| m.f1),
                }
            };
            Ok(Aggregate::Classification {
                mean: summary(|c, g| mean(c.iter().map(|m| g(m)))),
                best: summary(|c, g| fold_max(c.iter().map(|m| g(m)))),
            })
        }
        TrialMetrics::Regression(_) => {
            let r: Vec<&RegressionMetrics> = metrics
                .iter()
                .map(|m| match m {
                    TrialMetrics::Regression(r) => Ok(r),
                    TrialMetrics::Classification(_) => Err(Error::Config("mixed trial kinds".into())),
                })
                .collect::<Result<_>>()?;
            // RRMSE is reported only when every trial defines it.
            let rrmse: Option<Vec<f64>> = r.iter().map(|m| m.rrmse).collect();
            Ok(Aggregate::Regression {
                mean: RegressionSummary {
                    mae: mean(r.iter().map(|m| m.mae)),
                    rmse: mean(r.iter().map(|m| m.rmse)),
                    rrmse: rrmse.as_ref().map(|v| mean(v.iter().copied())),
                },
                best: RegressionSummary {
                    mae: fold_min(r.iter().map(|m| m.mae)),
                    rmse: fold_min(r.iter().map(|m| m.rmse)),
                    rrmse: rrmse.as_ref().map(|v| fold_min(v.iter().copied())),
                },
            })
        }
    }
}

/// Aggregated results of one (task, mode, target, model) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub task: SpeechTask,
    pub mode: FeatureMode,
    /// `None` for diagnosis classification, otherwise the regressed MoCA score.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MocaTarget>,
    pub model: ModelKind,
    pub n_samples: usize,
    pub n_trials: usize,
    #[serde(flatten)]
    pub aggregate: Aggregate,
    /// How often each grid point won the inner selection.
    pub chosen: BTreeMap<String, usize>,
}

impl ReportCell {
    pub fn from_trials(
        task: SpeechTask,
        mode: FeatureMode,
        target: Option<MocaTarget>,
        n_samples: usize,
        trials: &[TrialResult],
    ) -> Result<Self> {
        let aggregate = aggregate_trials(trials)?;
        let mut chosen = BTreeMap::new();
        for t in trials {
            *chosen.entry(t.chosen.describe()).or_insert(0) += 1;
        }
        Ok(ReportCell {
            task,
            mode,
            target,
            model: trials[0].model,
            n_samples,
            n_trials: trials.len(),
            aggregate,
            chosen,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seed: u64,
    pub cv: CvConfig,
    /// The full run configuration, echoed for provenance.
    pub config: serde_json::Value,
    pub cells: Vec<ReportCell>,
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt)
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::ManifestSyntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Distinct (task, mode) pairs in first-appearance order.
    pub fn sections(&self) -> Vec<(SpeechTask, FeatureMode)> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&(c.task, c.mode)) {
                out.push((c.task, c.mode));
            }
        }
        out
    }

    /// Mean/best table for one (task, mode): one row per model (and target
    /// for regression). Returns `None` when there are no such cells.
    pub fn table(&self, task: SpeechTask, mode: FeatureMode, regression: bool) -> Result<Option<String>> {
        let cells: Vec<&ReportCell> = self
            .cells
            .iter()
            .filter(|c| c.task == task && c.mode == mode && c.target.is_some() == regression)
            .collect();
        if cells.is_empty() {
            return Ok(None);
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        if regression {
            w.write_record([
                "target", "model", "n_trials", "mae_mean", "mae_best", "rmse_mean", "rmse_best", "rrmse_mean",
                "rrmse_best",
            ])?;
        } else {
            w.write_record([
                "model",
                "n_trials",
                "accuracy_mean",
                "accuracy_best",
                "precision_mean",
                "precision_best",
                "recall_mean",
                "recall_best",
                "f1_mean",
                "f1_best",
            ])?;
        }
        for c in cells {
            match (&c.aggregate, c.target) {
                (Aggregate::Classification { mean, best }, None) => w.write_record([
                    c.model.as_str().to_string(),
                    c.n_trials.to_string(),
                    fmt(mean.accuracy),
                    fmt(best.accuracy),
                    fmt(mean.precision),
                    fmt(best.precision),
                    fmt(mean.recall),
                    fmt(best.recall),
                    fmt(mean.f1),
                    fmt(best.f1),
                ])?,
                (Aggregate::Regression { mean, best }, Some(t)) => w.write_record([
                    t.name().to_string(),
                    c.model.as_str().to_string(),
                    c.n_trials.to_string(),
                    fmt(mean.mae),
                    fmt(best.mae),
                    fmt(mean.rmse),
                    fmt(best.rmse),
                    fmt_opt(mean.rrmse),
                    fmt_opt(best.rrmse),
                ])?,
                _ => return Err(Error::Config("report cell kind does not match its target".into())),
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(Some(String::from_utf8(bytes).expect("csv output is utf-8")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(rmse: f64) -> TrialMetrics {
        TrialMetrics::Regression(RegressionMetrics {
            mae: rmse / 2.0,
            rmse,
            rrmse: Some(rmse * 10.0),
        })
    }

    #[test]
    fn regression_best_is_min() {
        let Aggregate::Regression { mean, best } = aggregate_metrics(&[reg(2.0), reg(1.5)]).unwrap() else {
            panic!()
        };
        assert_eq!((mean.rmse, best.rmse), (1.75, 1.5));
        assert_eq!((mean.rrmse, best.rrmse), (Some(17.5), Some(15.0)));
    }

    #[test]
    fn missing_rrmse_propagates() {
        let mut b = reg(1.0);
        if let TrialMetrics::Regression(m) = &mut b {
            m.rrmse = None;
        }
        let Aggregate::Regression { mean, .. } = aggregate_metrics(&[reg(2.0), b]).unwrap() else {
            panic!()
        };
        assert_eq!(mean.rrmse, None);
    }

    #[test]
    fn empty_and_mixed_rejected() {
        assert!(aggregate_metrics(&[]).is_err());
        let c = TrialMetrics::Classification(ClassificationMetrics::from_counts(1, 0, 0, 1));
        assert!(aggregate_metrics(&[c, reg(1.0)]).is_err());
    }
}
