use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::scalar::Scalar;

/// Binary classification scores with respect to a chosen positive class.
/// Ratios with a zero denominator are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ClassificationMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassificationMetrics {
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            tn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub rmse: f64,
    /// `100 · rmse / mean(y_true)` in percent; absent unless the mean is positive.
    pub rrmse: Option<f64>,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} true values, {b} predictions")));
    }
    if a == 0 {
        return Err(Error::Empty("metric input"));
    }
    Ok(())
}

pub fn classification_metrics(
    y_true: &[DiagnosisLabel],
    y_pred: &[DiagnosisLabel],
    positive: DiagnosisLabel,
) -> Result<ClassificationMetrics> {
    check_lengths(y_true.len(), y_pred.len())?;
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(ClassificationMetrics::from_counts(tp, fp, fn_, tn))
}

pub fn regression_metrics<T: Scalar>(y_true: &[T], y_pred: &[T]) -> Result<RegressionMetrics> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let (mut abs, mut sq, mut sum) = (0.0, 0.0, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        let e = t.as_f64() - p.as_f64();
        abs += e.abs();
        sq += e * e;
        sum += t.as_f64();
    }
    let rmse = (sq / n).sqrt();
    let mean = sum / n;
    Ok(RegressionMetrics {
        mae: abs / n,
        rmse,
        rrmse: (mean > 0.0).then(|| 100.0 * rmse / mean),
    })
}
