//! Reading-vs-generation comparison across evaluation reports.

use std::collections::BTreeMap;

use vamci_core::evaluation::{Aggregate, EvaluationReport, ReportCell};
use vamci_core::fusion::FeatureMode;
use vamci_core::learners::ModelKind;
use vamci_core::model::{MocaTarget, SpeechTask};
use vamci_core::{Error, Result};

/// Marks a task that none of the inputs evaluated.
pub const ABSENT: &str = "absent";

type Key = (Option<MocaTarget>, FeatureMode, ModelKind);
type Metrics = Vec<(&'static str, Option<f64>, Option<f64>)>;

/// `(metric, mean, best)` triples of one cell; `None` values are undefined metrics.
fn metrics(cell: &ReportCell) -> Metrics {
    match &cell.aggregate {
        Aggregate::Classification { mean, best } => vec![
            ("accuracy", Some(mean.accuracy), Some(best.accuracy)),
            ("precision", Some(mean.precision), Some(best.precision)),
            ("recall", Some(mean.recall), Some(best.recall)),
            ("f1", Some(mean.f1), Some(best.f1)),
        ],
        Aggregate::Regression { mean, best } => vec![
            ("mae", Some(mean.mae), Some(best.mae)),
            ("rmse", Some(mean.rmse), Some(best.rmse)),
            ("rrmse", mean.rrmse, best.rrmse),
        ],
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.4}"))
}

/// One row per (problem, mode, model, metric) with both tasks side by side
/// and `generation - reading` in the last column. Cells repeated across
/// inputs are taken from the last input that has them.
pub fn comparison_csv(reports: &[EvaluationReport]) -> Result<String> {
    let mut order: Vec<Key> = Vec::new();
    let mut cells: BTreeMap<(Key, SpeechTask), &ReportCell> = BTreeMap::new();
    for report in reports {
        for c in &report.cells {
            let key = (c.target, c.mode, c.model);
            if !order.contains(&key) {
                order.push(key);
            }
            if cells.insert((key, c.task), c).is_some() {
                log::warn!("{} {} {} evaluated more than once; keeping the later result", c.task, c.mode, c.model);
            }
        }
    }
    if order.is_empty() {
        return Err(Error::Empty("evaluation reports contain no cells"));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "problem",
        "mode",
        "model",
        "metric",
        "reading_mean",
        "reading_best",
        "generation_mean",
        "generation_best",
        "delta_mean",
    ])?;
    for key in order {
        let (target, mode, model) = key;
        let reading = cells.get(&(key, SpeechTask::Reading)).map(|c| metrics(c));
        let generation = cells.get(&(key, SpeechTask::Generation)).map(|c| metrics(c));
        let names = reading.as_ref().or(generation.as_ref()).expect("at least one task present");
        for (i, &(metric, _, _)) in names.iter().enumerate() {
            let side = |m: &Option<Metrics>| match m {
                Some(v) => (fmt(v[i].1), fmt(v[i].2), v[i].1),
                None => (ABSENT.to_string(), ABSENT.to_string(), None),
            };
            let (r_mean, r_best, r) = side(&reading);
            let (g_mean, g_best, g) = side(&generation);
            let delta = match (&reading, &generation) {
                (Some(_), Some(_)) => fmt(r.zip(g).map(|(r, g)| g - r)),
                _ => ABSENT.to_string(),
            };
            let problem = target.map_or("diagnosis", |t| t.name());
            w.write_record([problem, mode.as_str(), model.as_str(), metric, &r_mean, &r_best, &g_mean, &g_best, &delta])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Pads CSV columns to a common width for terminal display.
pub fn align_csv(text: &str) -> String {
    let rows: Vec<Vec<String>> = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes())
        .records()
        .filter_map(|r| r.ok())
        .map(|r| r.iter().map(str::to_string).collect())
        .collect();
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncols)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(j, s)| format!("{s:<w$}", w = widths[j])).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
