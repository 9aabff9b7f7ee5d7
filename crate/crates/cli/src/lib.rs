//! Command-line driver for the MCI screening pipeline:
//! `simulate`, `ingest`, `features`, `evaluate` and `report`.
//!
//! Every subcommand reads the same TOML run configuration; a handful of
//! flags override it. Parallelism (`--jobs`) lives only here and never
//! changes results.

pub mod commands;
pub mod compare;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use vamci_core::fusion::FeatureMode;
use vamci_core::learners::ModelKind;
use vamci_core::model::SpeechTask;
use vamci_core::{Error, ErrorClass};

use crate::compare::align_csv;
use crate::config::{Overrides, Run};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for unreadable or malformed input, 3 for invalid data or
    /// configuration, 4 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Validation => 3,
                ErrorClass::Internal => 4,
            },
            CliError::Internal(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vamci", version, about = "Screen for MCI from voice-assistant command sessions")]
pub struct Cli {
    /// TOML run configuration; relative paths inside it are resolved against its directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tasks to process: reading, generation.
    #[arg(long, global = true, value_delimiter = ',')]
    pub task: Vec<SpeechTask>,
    /// Feature sets: INTENT, AUDIO, TEXTUAL, FF1..FF4.
    #[arg(long, global = true, value_delimiter = ',')]
    pub modes: Vec<FeatureMode>,
    /// Models: DT, RF, KNN, SVM, LRR, SVR.
    #[arg(long, global = true, value_delimiter = ',')]
    pub models: Vec<ModelKind>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for evaluation; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic cohort to the cohort directory and print its count summary.
    Simulate,
    /// Parse and clean every session manifest, reporting kept and dropped commands.
    Ingest {
        /// Manifest directory (defaults to the configured cohort).
        dir: Option<PathBuf>,
    },
    /// Build one design matrix per (task, feature set).
    Features,
    /// Nested cross-validation for every configured model.
    Evaluate,
    /// Compare tasks across evaluation reports and write box-plot data.
    Report {
        /// Report files (defaults to the configured output's report.json).
        reports: Vec<PathBuf>,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            tasks: self.task.clone(),
            modes: self.modes.clone(),
            models: self.models.clone(),
            out: self.out.clone(),
        }
    }
}

/// Runs one parsed invocation, printing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let run = Run::load(cli.config.as_deref(), &cli.overrides(), cli.jobs)?;
    let io = |e: std::io::Error| CliError::Core(Error::Io(e));
    match &cli.command {
        Command::Simulate => {
            let summary = commands::simulate(&run)?;
            write!(out, "{}", align_csv(&commands::to_csv(&summary)?)).map_err(io)?;
        }
        Command::Ingest { dir } => {
            let rows = commands::ingest(&run, dir.as_deref())?;
            write!(out, "{}", align_csv(&commands::to_csv(&rows)?)).map_err(io)?;
            writeln!(out, "{} sessions", rows.len()).map_err(io)?;
        }
        Command::Features => {
            for f in commands::features(&run)? {
                writeln!(out, "{} {}: {} x {} -> {}", f.task, f.mode, f.rows, f.cols, f.matrix.display()).map_err(io)?;
            }
        }
        Command::Evaluate => {
            let report = commands::evaluate(&run)?;
            for (task, mode) in report.sections() {
                for regression in [false, true] {
                    if let Some(table) = report.table(task, mode, regression)? {
                        writeln!(out, "{task} {mode}").map_err(io)?;
                        write!(out, "{}", align_csv(&table)).map_err(io)?;
                    }
                }
            }
            writeln!(out, "report: {}", run.report_path().display()).map_err(io)?;
        }
        Command::Report { reports } => {
            let r = commands::report(&run, reports)?;
            write!(out, "{}", align_csv(&r.comparison)).map_err(io)?;
        }
    }
    Ok(())
}
