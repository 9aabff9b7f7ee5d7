use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vamci_core::evaluation::{outer_plans, run_trial, EvaluationReport, ReportCell, TrialResult};
use vamci_core::fusion::{session_features, FeatureMode};
use vamci_core::ingest::{
    load_cohort_dir, load_session, manifest_paths, preprocess_with_counts, read_matrix_path,
    write_embedding_path, EmbeddingMatrix,
};
use vamci_core::intent::AnchorSet;
use vamci_core::learners::{Hyperparams, ModelKind, Targets};
use vamci_core::model::{participant_command_count, Cohort, DiagnosisLabel, MocaTarget, Provenance, Session, SpeechTask};
use vamci_core::sim::{simulate_cohort, summarize_cohort, write_cohort, GroupSummary};
use vamci_core::{Dataset, Error};

use crate::config::Run;
use crate::{CliError, CliResult};

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).at(dir))?;
    }
    fs::write(path, contents).map_err(|e| Error::from(e).at(path))
}

pub(crate) fn to_csv<S: Serialize>(rows: &[S]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn require_dir(dir: &Path) -> Result<(), Error> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Error::from(io::Error::new(io::ErrorKind::NotFound, "directory not found")).at(dir))
    }
}

/// Loads every manifest in `dir`, keeping each session's manifest path.
fn load_sessions(dir: &Path) -> Result<Vec<(PathBuf, Session)>, Error> {
    require_dir(dir)?;
    let paths = manifest_paths(dir)?;
    if paths.is_empty() {
        return Err(Error::Empty("cohort directory holds no manifests").at(dir));
    }
    let sessions = paths.iter().map(|p| load_session(p)).collect::<Result<Vec<_>, _>>()?;
    let cohort = Cohort::new(sessions, Provenance::Ingested).map_err(|e| e.at(dir))?;
    Ok(paths.into_iter().zip(cohort.into_sessions()).collect())
}

/// Simulates a cohort into the configured cohort directory.
pub fn simulate(run: &Run) -> CliResult<Vec<GroupSummary>> {
    let mut cfg = run.config.simulation.clone();
    cfg.seed = run.config.require_seed()?;
    let sim = simulate_cohort(&cfg)?;
    let dir = run.cohort_dir();
    write_cohort(&dir, &sim)?;
    write_file(&dir.join("simulation.toml"), cfg.to_toml())?;
    let on_disk = manifest_paths(&dir)?.len();
    if on_disk != sim.cohort.len() {
        log::warn!(
            "{} holds {on_disk} manifests but {} were simulated; stale files will be read by later steps",
            dir.display(),
            sim.cohort.len()
        );
    }
    Ok(summarize_cohort(&sim.cohort, Some(&sim.anchors))?)
}

/// One line of the ingest summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestRow {
    pub manifest: String,
    pub participant_id: String,
    pub session_index: u8,
    pub task: SpeechTask,
    pub label: DiagnosisLabel,
    /// Commands listed in the manifest.
    pub listed: usize,
    /// Usable commands after preprocessing.
    pub kept: usize,
    pub non_participant: usize,
    pub asr_error: usize,
    pub unmatched: usize,
    pub unresolvable: usize,
}

/// Parses and preprocesses every session in `dir` and writes `ingest.csv`.
pub fn ingest(run: &Run, dir: Option<&Path>) -> CliResult<Vec<IngestRow>> {
    let dir = dir.map_or_else(|| run.cohort_dir(), Path::to_path_buf);
    let mut rows = Vec::new();
    for (path, session) in load_sessions(&dir)? {
        let (clean, drops) = preprocess_with_counts(&session).map_err(|e| e.at(&path))?;
        rows.push(IngestRow {
            manifest: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            participant_id: session.participant_id.clone(),
            session_index: session.session_index,
            task: session.task,
            label: session.label(),
            listed: session.commands.len(),
            kept: clean.commands.len(),
            non_participant: drops.non_participant,
            asr_error: drops.asr_error,
            unmatched: drops.unmatched,
            unresolvable: drops.unresolvable,
        });
    }
    write_file(&run.out_dir().join("ingest.csv"), to_csv(&rows)?)?;
    Ok(rows)
}

/// Sidecar row describing one design-matrix row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRow {
    pub participant_id: String,
    pub session_index: u8,
    pub task: SpeechTask,
    pub label: DiagnosisLabel,
    pub n_commands: usize,
    pub total: u8,
    pub memory: u8,
    pub executive_function: u8,
    pub attention: u8,
    pub language: u8,
    pub visuospatial: u8,
    pub orientation: u8,
}

impl SampleRow {
    fn new(s: &Session) -> Self {
        let m = |t| s.moca.score(t);
        SampleRow {
            participant_id: s.participant_id.clone(),
            session_index: s.session_index,
            task: s.task,
            label: s.label(),
            n_commands: participant_command_count(s),
            total: m(MocaTarget::Total),
            memory: m(MocaTarget::Memory),
            executive_function: m(MocaTarget::ExecutiveFunction),
            attention: m(MocaTarget::Attention),
            language: m(MocaTarget::Language),
            visuospatial: m(MocaTarget::Visuospatial),
            orientation: m(MocaTarget::Orientation),
        }
    }

    pub fn score(&self, target: MocaTarget) -> u8 {
        match target {
            MocaTarget::Total => self.total,
            MocaTarget::Memory => self.memory,
            MocaTarget::ExecutiveFunction => self.executive_function,
            MocaTarget::Attention => self.attention,
            MocaTarget::Language => self.language,
            MocaTarget::Visuospatial => self.visuospatial,
            MocaTarget::Orientation => self.orientation,
        }
    }
}

pub fn feature_stem(task: SpeechTask, mode: FeatureMode) -> String {
    format!("{task}_{}", mode.as_str().to_ascii_lowercase())
}

/// Where one design matrix and its sidecar live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureFiles {
    pub task: SpeechTask,
    pub mode: FeatureMode,
    pub rows: usize,
    pub cols: usize,
    pub matrix: PathBuf,
    pub sidecar: PathBuf,
}

fn feature_paths(run: &Run, task: SpeechTask, mode: FeatureMode) -> (PathBuf, PathBuf) {
    let dir = run.features_dir();
    let stem = feature_stem(task, mode);
    (dir.join(format!("{stem}.vaef")), dir.join(format!("{stem}.csv")))
}

/// Writes one design matrix (VAEF, `f32`) plus a label sidecar per selected (task, mode).
pub fn features(run: &Run) -> CliResult<Vec<FeatureFiles>> {
    let cfg = &run.config;
    let mut sessions = Vec::new();
    for (path, s) in load_sessions(&run.cohort_dir())? {
        if cfg.tasks.contains(&s.task) {
            let clean = preprocess_with_counts(&s).map_err(|e| e.at(&path))?.0;
            sessions.push((path, clean));
        }
    }
    sessions.sort_by(|(_, a), (_, b)| (&a.participant_id, a.session_index).cmp(&(&b.participant_id, b.session_index)));

    let needs_anchors = cfg.modes.iter().any(|m| m.components().0);
    let anchors = if needs_anchors {
        Some(AnchorSet::load(&run.anchors_path())?)
    } else {
        None
    };

    let mut out = Vec::new();
    for &task in &cfg.tasks {
        let group: Vec<&(PathBuf, Session)> = sessions.iter().filter(|(_, s)| s.task == task).collect();
        if group.is_empty() {
            let msg = format!("no {task} sessions in {}; choose tasks with --task", run.cohort_dir().display());
            return Err(Error::Config(msg).into());
        }
        let sidecar_rows: Vec<SampleRow> = group.iter().map(|(_, s)| SampleRow::new(s)).collect();
        let sidecar_csv = to_csv(&sidecar_rows)?;
        for &mode in &cfg.modes {
            let mut rows = Vec::with_capacity(group.len());
            for (path, s) in &group {
                let v = session_features::<f64>(s, anchors.as_ref(), mode).map_err(|e| e.at(path))?;
                rows.push(v.values.iter().map(|&x| x as f32).collect::<Vec<f32>>());
            }
            let cols = rows[0].len();
            let m = EmbeddingMatrix::from_rows(cols, &rows)?;
            let (matrix, sidecar) = feature_paths(run, task, mode);
            write_file(&sidecar, &sidecar_csv)?;
            write_embedding_path(&matrix, &m)?;
            out.push(FeatureFiles {
                task,
                mode,
                rows: m.rows(),
                cols,
                matrix,
                sidecar,
            });
        }
    }
    Ok(out)
}

/// Reads a design matrix and its sidecar back.
pub fn load_features(run: &Run, task: SpeechTask, mode: FeatureMode) -> CliResult<(Array2<f64>, Vec<SampleRow>)> {
    let (matrix, sidecar) = feature_paths(run, task, mode);
    let m = read_matrix_path(&matrix)?;
    let mut reader = csv::Reader::from_path(&sidecar).map_err(|e| Error::from(e).at(&sidecar))?;
    let rows = reader
        .deserialize()
        .collect::<Result<Vec<SampleRow>, _>>()
        .map_err(|e| Error::from(e).at(&sidecar))?;
    if rows.len() != m.rows() {
        let msg = format!("{} sidecar rows for {} matrix rows", rows.len(), m.rows());
        return Err(Error::DimensionMismatch(msg).at(&sidecar).into());
    }
    let x = Array2::from_shape_fn((m.rows(), m.cols()), |(i, j)| m.row(i)[j] as f64);
    Ok((x, rows))
}

struct Cell {
    task: SpeechTask,
    mode: FeatureMode,
    target: Option<MocaTarget>,
    grid: Vec<Hyperparams>,
    data: usize,
}

/// Runs nested cross-validation for every configured cell, writes
/// `report.json` plus one CSV table per (task, mode) and problem type.
pub fn evaluate(run: &Run) -> CliResult<EvaluationReport> {
    let cfg = &run.config;
    let seed = cfg.require_seed()?;
    let cv = cfg.cv_config(seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;

    let classifiers: Vec<ModelKind> = cfg.models.iter().copied().filter(|m| m.supports_classification()).collect();
    let regressors: Vec<ModelKind> = cfg.models.iter().copied().filter(|m| m.supports_regression()).collect();
    let mut grids = BTreeMap::new();
    for &kind in &cfg.models {
        grids.insert(kind, cfg.grid(kind)?);
    }

    let mut report_cells = Vec::new();
    for &task in &cfg.tasks {
        for &mode in &cfg.modes {
            let (x, rows) = load_features(run, task, mode)?;
            let groups: Vec<String> = rows.iter().map(|r| r.participant_id.clone()).collect();
            let labels = Targets::Labels(rows.iter().map(|r| r.label).collect());
            let base = Dataset::new(x, labels, groups)?;

            let mut datasets = Vec::new();
            let mut cells = Vec::new();
            if cfg.classify {
                datasets.push(base.clone());
                for &kind in &classifiers {
                    cells.push(Cell { task, mode, target: None, grid: grids[&kind].clone(), data: 0 });
                }
            }
            if !regressors.is_empty() {
                for &target in &cfg.targets {
                    let values = rows.iter().map(|r| r.score(target) as f64).collect();
                    datasets.push(base.with_targets(Targets::Values(values))?);
                    for &kind in &regressors {
                        let data = datasets.len() - 1;
                        cells.push(Cell { task, mode, target: Some(target), grid: grids[&kind].clone(), data });
                    }
                }
            }
            let plans = datasets.iter().map(|d| outer_plans(d, &cv)).collect::<Result<Vec<_>, _>>()?;

            let mut work = Vec::new();
            for (c, cell) in cells.iter().enumerate() {
                for (p, plan) in plans[cell.data].iter().enumerate() {
                    work.extend((0..plan.k()).map(|f| (c, p, f)));
                }
            }
            log::info!("{task}/{mode}: {} cells, {} trials", cells.len(), work.len());
            let results: Vec<Result<TrialResult, Error>> = pool.install(|| {
                work.par_iter()
                    .map(|&(c, p, f)| {
                        let cell = &cells[c];
                        run_trial(&datasets[cell.data], &cell.grid, &cv, &plans[cell.data][p], f)
                    })
                    .collect()
            });
            let mut per_cell: Vec<Vec<TrialResult>> = (0..cells.len()).map(|_| Vec::new()).collect();
            for (&(c, _, _), r) in work.iter().zip(results) {
                per_cell[c].push(r?);
            }
            for (cell, trials) in cells.iter().zip(per_cell) {
                let n = datasets[cell.data].len();
                report_cells.push(ReportCell::from_trials(cell.task, cell.mode, cell.target, n, &trials)?);
            }
        }
    }

    let report = EvaluationReport {
        seed,
        cv,
        config: serde_json::to_value(cfg).expect("run config serializes"),
        cells: report_cells,
    };
    let out = run.out_dir();
    write_file(&run.report_path(), report.to_json())?;
    for (task, mode) in report.sections() {
        for (regression, suffix) in [(false, "classification"), (true, "regression")] {
            if let Some(table) = report.table(task, mode, regression)? {
                let name = format!("{}_{suffix}.csv", feature_stem(task, mode));
                write_file(&out.join("tables").join(name), table)?;
            }
        }
    }
    Ok(report)
}

/// Box-plot data: one row per session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxPoint {
    pub task: SpeechTask,
    pub label: DiagnosisLabel,
    pub participant_id: String,
    pub session_index: u8,
    pub n_commands: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutput {
    pub comparison: String,
    pub box_summary: Option<Vec<GroupSummary>>,
}

/// Joins evaluation reports into one reading-vs-generation comparison and,
/// when the cohort is present, writes box-plot data for command counts.
pub fn report(run: &Run, inputs: &[PathBuf]) -> CliResult<ReportOutput> {
    let default = [run.report_path()];
    let inputs = if inputs.is_empty() { &default[..] } else { inputs };
    let mut reports = Vec::new();
    for path in inputs {
        let bytes = fs::read(path).map_err(|e| Error::from(e).at(path))?;
        reports.push(EvaluationReport::from_json(&bytes).map_err(|e| e.at(path))?);
    }
    let comparison = crate::compare::comparison_csv(&reports)?;
    let out = run.out_dir();
    write_file(&out.join("comparison.csv"), &comparison)?;

    let cohort_dir = run.cohort_dir();
    let box_summary = if cohort_dir.is_dir() && !manifest_paths(&cohort_dir)?.is_empty() {
        let cohort = load_cohort_dir(&cohort_dir, Provenance::Ingested)?;
        let anchors_path = run.anchors_path();
        let anchors = if anchors_path.is_file() { Some(AnchorSet::load(&anchors_path)?) } else { None };
        let summary = summarize_cohort(&cohort, anchors.as_ref())?;
        let mut points: Vec<BoxPoint> = cohort
            .sessions()
            .iter()
            .map(|s| BoxPoint {
                task: s.task,
                label: s.label(),
                participant_id: s.participant_id.clone(),
                session_index: s.session_index,
                n_commands: participant_command_count(s),
            })
            .collect();
        points.sort_by(|a, b| {
            (a.task, a.label, &a.participant_id, a.session_index).cmp(&(b.task, b.label, &b.participant_id, b.session_index))
        });
        write_file(&out.join("boxplot.csv"), to_csv(&summary)?)?;
        write_file(&out.join("boxplot_points.csv"), to_csv(&points)?)?;
        Some(summary)
    } else {
        log::info!("no cohort at {}; skipping box-plot data", cohort_dir.display());
        None
    };
    Ok(ReportOutput {
        comparison,
        box_summary,
    })
}
