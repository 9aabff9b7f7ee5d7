//! Participant-grouped nested cross-validation, metrics and mean/best reports.

mod folds;
mod metrics;
mod nested;
mod report;

pub use folds::{make_outer_folds, FoldPlan};
pub use metrics::{classification_metrics, regression_metrics, ClassificationMetrics, RegressionMetrics};
pub use nested::{nested_cv, outer_plans, run_trial, CvConfig, TrialMetrics, TrialResult};
pub use report::{
    aggregate_metrics, aggregate_trials, Aggregate, ClassificationSummary, EvaluationReport, RegressionSummary,
    ReportCell,
};
