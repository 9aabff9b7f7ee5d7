//! Synthetic cohorts with a plantable MCI effect.
//!
//! Every participant gets a fixed label (exact prevalence split), one MoCA
//! assessment drawn from a label-conditional model, and a number of sessions
//! per configured task. A session's usable command count is
//! `floor + NB(mean - floor + shift, dispersion)` and each usable command
//! picks an anchor (in order for reading, uniformly for generation). Its
//! sentence, audio and textual embeddings are that anchor's prototype in the
//! respective space plus isotropic Gaussian noise whose expected norm is
//! `sigma0 + noise_shift` for MCI sessions and `sigma0` otherwise.
//! Prototypes are unit vectors, so the noise norm reads directly as a
//! relative perturbation at any embedding width.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{preprocess, write_embedding_path, write_manifest, EmbeddingMatrix, EmbeddingPaths};
use crate::intent::{default_anchor_entries, intent_features, AnchorEntry, AnchorFile, AnchorSet};
use crate::model::{
    participant_command_count, Cohort, Command, CommandStatus, DiagnosisLabel, MocaAssessment, MocaTarget,
    Provenance, Session, SessionEmbeddings, SpeechTask, Speaker,
};
use crate::rng::{stream, StreamRng};

const LABEL_STREAM: u64 = 1;
const PROTOTYPE_STREAM: u64 = 2;
const MOCA_STREAM: u64 = 3;
const SESSION_STREAM: u64 = 4;

/// Width of each simulated embedding space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimDims {
    pub audio: usize,
    pub textual: usize,
    pub sentence: usize,
}

impl Default for SimDims {
    fn default() -> Self {
        SimDims {
            audio: 1024,
            textual: 768,
            sentence: 384,
        }
    }
}

/// Command-count distribution and planted MCI effect for one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskModel {
    /// Minimum usable commands per session.
    pub floor: u32,
    /// Mean usable commands for HC sessions, including the floor.
    pub mean: f64,
    /// Negative-binomial dispersion of the excess over the floor.
    pub dispersion: f64,
    /// Extra mean commands for MCI sessions.
    #[serde(default)]
    pub count_shift: f64,
    /// Extra embedding noise norm for MCI sessions.
    #[serde(default)]
    pub noise_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

const fn g(mean: f64, sd: f64) -> Gaussian {
    Gaussian { mean, sd }
}

/// Label-conditional MoCA score model. Draws are rounded and truncated to
/// each score's valid range; the total is further truncated to the label's
/// side of the HC threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MocaModel {
    pub total: Gaussian,
    pub memory: Gaussian,
    pub executive_function: Gaussian,
    pub attention: Gaussian,
    pub language: Gaussian,
    pub visuospatial: Gaussian,
    pub orientation: Gaussian,
}

impl MocaModel {
    fn get(&self, t: MocaTarget) -> Gaussian {
        match t {
            MocaTarget::Total => self.total,
            MocaTarget::Memory => self.memory,
            MocaTarget::ExecutiveFunction => self.executive_function,
            MocaTarget::Attention => self.attention,
            MocaTarget::Language => self.language,
            MocaTarget::Visuospatial => self.visuospatial,
            MocaTarget::Orientation => self.orientation,
        }
    }

    pub const HC: MocaModel = MocaModel {
        total: g(27.5, 1.2),
        memory: g(12.0, 1.5),
        executive_function: g(11.0, 1.0),
        attention: g(16.0, 1.5),
        language: g(5.0, 1.25),
        visuospatial: g(6.0, 0.8),
        orientation: g(5.8, 0.4),
    };

    pub const MCI: MocaModel = MocaModel {
        total: g(22.0, 2.0),
        memory: g(8.0, 1.5),
        executive_function: g(9.5, 1.5),
        attention: g(12.0, 1.5),
        language: g(5.0, 1.25),
        visuospatial: g(5.5, 1.0),
        orientation: g(5.5, 0.6),
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MocaConfig {
    pub hc: MocaModel,
    pub mci: MocaModel,
}

impl Default for MocaConfig {
    fn default() -> Self {
        MocaConfig {
            hc: MocaModel::HC,
            mci: MocaModel::MCI,
        }
    }
}

/// Per usable command, the probability of an extra dropped utterance of each kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JunkRates {
    pub assistant: f64,
    pub asr_error: f64,
    pub unmatched: f64,
}

impl Default for JunkRates {
    fn default() -> Self {
        JunkRates {
            assistant: 0.1,
            asr_error: 0.05,
            unmatched: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub n_participants: usize,
    /// Sessions per participant and task, at most 7.
    pub sessions_per_participant: usize,
    /// Fraction of participants labeled MCI; the count is rounded to nearest.
    pub mci_prevalence: f64,
    pub tasks: Vec<SpeechTask>,
    pub dims: SimDims,
    /// Expected embedding noise norm shared by all sessions.
    pub sigma0: f64,
    pub reading: TaskModel,
    pub generation: TaskModel,
    pub moca: MocaConfig,
    pub junk: JunkRates,
    /// Optional anchor file whose entries and embeddings replace the
    /// bundled catalog and seeded random sentence prototypes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchors: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            n_participants: 35,
            sessions_per_participant: 7,
            mci_prevalence: 98.0 / 243.0,
            tasks: SpeechTask::ALL.to_vec(),
            dims: SimDims::default(),
            sigma0: 0.2,
            reading: TaskModel {
                floor: 30,
                mean: 34.0,
                dispersion: 20.0,
                count_shift: 0.0,
                noise_shift: 0.0,
            },
            generation: TaskModel {
                floor: 15,
                mean: 40.0,
                dispersion: 6.0,
                count_shift: 8.0,
                noise_shift: 0.3,
            },
            moca: MocaConfig::default(),
            junk: JunkRates::default(),
            anchors: None,
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("simulation config serializes")
    }

    pub fn task_model(&self, task: SpeechTask) -> &TaskModel {
        match task {
            SpeechTask::Reading => &self.reading,
            SpeechTask::Generation => &self.generation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_participants == 0 {
            return bad("n_participants must be positive".into());
        }
        if !(1..=7).contains(&self.sessions_per_participant) {
            return bad(format!("sessions_per_participant = {} outside 1..=7", self.sessions_per_participant));
        }
        if !(0.0..=1.0).contains(&self.mci_prevalence) {
            return bad(format!("mci_prevalence = {} outside [0, 1]", self.mci_prevalence));
        }
        if self.tasks.is_empty() || (self.tasks.len() == 2 && self.tasks[0] == self.tasks[1]) {
            return bad("tasks must list reading and/or generation once each".into());
        }
        if self.dims.audio == 0 || self.dims.textual == 0 || self.dims.sentence == 0 {
            return bad("embedding widths must be positive".into());
        }
        if !(self.sigma0 >= 0.0) {
            return bad("sigma0 must be nonnegative".into());
        }
        for (name, t) in [("reading", &self.reading), ("generation", &self.generation)] {
            if !(t.dispersion > 0.0) {
                return bad(format!("{name}.dispersion must be positive"));
            }
            if !(t.mean >= t.floor as f64) || !(t.mean + t.count_shift >= t.floor as f64) {
                return bad(format!("{name}: mean (with count_shift) below floor"));
            }
            if !(self.sigma0 + t.noise_shift >= 0.0) {
                return bad(format!("{name}: sigma0 + noise_shift must be nonnegative"));
            }
        }
        for model in [&self.moca.hc, &self.moca.mci] {
            for t in MocaTarget::ALL {
                let gs = model.get(t);
                if !gs.mean.is_finite() || !(gs.sd >= 0.0) {
                    return bad(format!("moca.{}: mean must be finite and sd nonnegative", t.name()));
                }
            }
        }
        let j = &self.junk;
        for (name, p) in [("assistant", j.assistant), ("asr_error", j.asr_error), ("unmatched", j.unmatched)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("junk.{name} = {p} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// A simulated cohort and the anchor set its sentence embeddings were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCohort {
    pub cohort: Cohort,
    pub anchors: AnchorSet,
}

fn unit_vector(rng: &mut StreamRng, d: usize) -> Vec<f32> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.iter().map(|x| (x / norm) as f32).collect();
        }
    }
}

fn prototypes(rng: &mut StreamRng, n: usize, d: usize) -> EmbeddingMatrix {
    let rows: Vec<Vec<f32>> = (0..n).map(|_| unit_vector(rng, d)).collect();
    EmbeddingMatrix::from_rows(d, &rows).expect("prototype rows are finite")
}

fn truncated_round(rng: &mut StreamRng, gs: Gaussian, lo: i64, hi: i64) -> i64 {
    let normal = Normal::new(gs.mean, gs.sd).expect("validated sd");
    for _ in 0..1000 {
        let v = normal.sample(rng).round() as i64;
        if (lo..=hi).contains(&v) {
            return v;
        }
    }
    (gs.mean.round() as i64).clamp(lo, hi)
}

fn draw_moca(rng: &mut StreamRng, model: &MocaModel, label: DiagnosisLabel) -> MocaAssessment {
    let threshold = crate::model::HC_THRESHOLD as i64;
    let mut s = [0i64; 7];
    for (slot, t) in s.iter_mut().zip(MocaTarget::ALL) {
        let (lo, hi) = match (t, label) {
            (MocaTarget::Total, DiagnosisLabel::Hc) => (threshold, 30),
            (MocaTarget::Total, DiagnosisLabel::Mci) => (0, threshold - 1),
            _ => (0, t.max() as i64),
        };
        *slot = truncated_round(rng, model.get(t), lo, hi);
    }
    MocaAssessment::new(s[6], s[0], s[1], s[2], s[3], s[4], s[5]).expect("draws are within range")
}

fn draw_count(rng: &mut StreamRng, model: &TaskModel, label: DiagnosisLabel) -> usize {
    let shift = if label == DiagnosisLabel::Mci { model.count_shift } else { 0.0 };
    let excess_mean = model.mean + shift - model.floor as f64;
    let excess = if excess_mean > 0.0 {
        let lambda = Gamma::new(model.dispersion, excess_mean / model.dispersion)
            .expect("validated dispersion")
            .sample(rng);
        if lambda > 0.0 {
            Poisson::new(lambda).expect("positive rate").sample(rng) as usize
        } else {
            0
        }
    } else {
        0
    };
    (model.floor as usize + excess).max(1)
}

fn noisy(rng: &mut StreamRng, proto: &[f32], sigma: f64) -> Vec<f32> {
    let per_coord = sigma / (proto.len() as f64).sqrt();
    proto
        .iter()
        .map(|&p| (p as f64 + per_coord * rng.sample::<f64, _>(StandardNormal)) as f32)
        .collect()
}

struct Spaces {
    sentence: EmbeddingMatrix,
    audio: EmbeddingMatrix,
    textual: EmbeddingMatrix,
}

#[allow(clippy::too_many_arguments)]
fn simulate_session(
    cfg: &SimConfig,
    anchors: &AnchorSet,
    spaces: &Spaces,
    participant: usize,
    session_index: u8,
    task: SpeechTask,
    label: DiagnosisLabel,
    moca: MocaAssessment,
) -> Session {
    let task_code = match task {
        SpeechTask::Reading => 0,
        SpeechTask::Generation => 1,
    };
    let mut rng = stream(
        cfg.seed,
        &[SESSION_STREAM, participant as u64, session_index as u64, task_code],
    );
    let model = cfg.task_model(task);
    let m = draw_count(&mut rng, model, label);
    let sigma = cfg.sigma0 + if label == DiagnosisLabel::Mci { model.noise_shift } else { 0.0 };
    let n = anchors.len();

    let mut commands = Vec::new();
    let (mut sentence, mut audio, mut textual) = (Vec::new(), Vec::new(), Vec::new());
    let mut next_id = 0usize;
    let mut push = |commands: &mut Vec<Command>, speaker, status, transcript: String, category, row| {
        next_id += 1;
        commands.push(Command {
            command_id: format!("c{next_id:03}"),
            speaker,
            transcript,
            category,
            status,
            embedding_row: row,
        });
    };
    for j in 0..m {
        let a = match task {
            SpeechTask::Reading => j % n,
            SpeechTask::Generation => rng.random_range(0..n),
        };
        let entry: &AnchorEntry = &anchors.entries()[a];
        let transcript = match task {
            SpeechTask::Reading => entry.anchor_text.clone(),
            SpeechTask::Generation => format!("{} ({})", entry.intent_text, j + 1),
        };
        sentence.push(noisy(&mut rng, spaces.sentence.row(a), sigma));
        audio.push(noisy(&mut rng, spaces.audio.row(a), sigma));
        textual.push(noisy(&mut rng, spaces.textual.row(a), sigma));
        push(
            &mut commands,
            Speaker::Participant,
            CommandStatus::Ok,
            transcript,
            entry.category,
            Some(j as u32),
        );
        let junk = cfg.junk;
        if rng.random::<f64>() < junk.assistant {
            push(&mut commands, Speaker::Assistant, CommandStatus::Unmatched, "Okay.".into(), None, None);
        }
        if rng.random::<f64>() < junk.asr_error {
            push(&mut commands, Speaker::Participant, CommandStatus::AsrError, String::new(), None, None);
        }
        if rng.random::<f64>() < junk.unmatched {
            push(
                &mut commands,
                Speaker::Participant,
                CommandStatus::Unmatched,
                format!("unmatched utterance {}", j + 1),
                None,
                None,
            );
        }
    }
    let matrix = |d: usize, rows: &[Vec<f32>]| EmbeddingMatrix::from_rows(d, rows).expect("finite embeddings");
    Session {
        participant_id: participant_id(participant),
        session_index,
        task,
        commands,
        moca,
        embeddings: SessionEmbeddings {
            audio: Some(matrix(cfg.dims.audio, &audio)),
            textual: Some(matrix(cfg.dims.textual, &textual)),
            sentence: Some(matrix(spaces.sentence.cols(), &sentence)),
        },
    }
}

pub fn participant_id(p: usize) -> String {
    format!("P{:03}", p + 1)
}

/// Exactly `round(prevalence × n)` MCI participants, placed by a seeded shuffle.
fn participant_labels(cfg: &SimConfig) -> Vec<DiagnosisLabel> {
    let n_mci = (cfg.mci_prevalence * cfg.n_participants as f64).round() as usize;
    let mut labels: Vec<DiagnosisLabel> = (0..cfg.n_participants)
        .map(|p| if p < n_mci { DiagnosisLabel::Mci } else { DiagnosisLabel::Hc })
        .collect();
    labels.shuffle(&mut stream(cfg.seed, &[LABEL_STREAM]));
    labels
}

pub fn simulate_cohort(cfg: &SimConfig) -> Result<SimulatedCohort> {
    cfg.validate()?;
    let mut proto_rng = stream(cfg.seed, &[PROTOTYPE_STREAM]);
    let anchors = match &cfg.anchors {
        Some(path) => AnchorSet::load(path)?,
        None => {
            let entries = default_anchor_entries();
            let emb = prototypes(&mut proto_rng, entries.len(), cfg.dims.sentence);
            AnchorSet::new(entries, emb)?
        }
    };
    let n = anchors.len();
    let spaces = Spaces {
        sentence: anchors.embeddings().clone(),
        audio: prototypes(&mut proto_rng, n, cfg.dims.audio),
        textual: prototypes(&mut proto_rng, n, cfg.dims.textual),
    };

    let labels = participant_labels(cfg);
    let mut sessions = Vec::new();
    for (p, &label) in labels.iter().enumerate() {
        let model = match label {
            DiagnosisLabel::Hc => &cfg.moca.hc,
            DiagnosisLabel::Mci => &cfg.moca.mci,
        };
        let moca = draw_moca(&mut stream(cfg.seed, &[MOCA_STREAM, p as u64]), model, label);
        for s in 1..=cfg.sessions_per_participant as u8 {
            for &task in &cfg.tasks {
                sessions.push(simulate_session(cfg, &anchors, &spaces, p, s, task, label, moca));
            }
        }
    }
    Ok(SimulatedCohort {
        cohort: Cohort::new(sessions, Provenance::Simulated)?,
        anchors,
    })
}

/// Base file name (without suffix) of a session's manifest.
pub fn session_stem(s: &Session) -> String {
    format!("{}_s{}_{}", s.participant_id, s.session_index, s.task)
}

pub const ANCHOR_FILE: &str = "anchors.json";

/// Writes manifests into `dir`, embedding matrices into `dir/embeddings/`,
/// and the anchor set as `anchors.json` plus `anchors.vaef`.
pub fn write_cohort(dir: &Path, sim: &SimulatedCohort) -> Result<()> {
    let emb_dir = dir.join("embeddings");
    fs::create_dir_all(&emb_dir).map_err(|e| Error::from(e).at(&emb_dir))?;
    for s in sim.cohort.sessions() {
        let stem = session_stem(s);
        let mut paths = EmbeddingPaths::default();
        for (name, m) in s.embeddings.attached() {
            let rel = PathBuf::from("embeddings").join(format!("{stem}.{name}.vaef"));
            write_embedding_path(&dir.join(&rel), m)?;
            match name {
                "audio" => paths.audio = Some(rel),
                "textual" => paths.textual = Some(rel),
                _ => paths.sentence = Some(rel),
            }
        }
        let path = dir.join(format!("{stem}{}", crate::ingest::MANIFEST_SUFFIX));
        fs::write(&path, write_manifest(s, &paths)).map_err(|e| Error::from(e).at(&path))?;
    }
    write_anchor_set(dir, "anchors", &sim.anchors)
}

/// Writes `{stem}.json` and `{stem}.vaef` into `dir`.
pub fn write_anchor_set(dir: &Path, stem: &str, anchors: &AnchorSet) -> Result<()> {
    let vaef = format!("{stem}.vaef");
    write_embedding_path(&dir.join(&vaef), anchors.embeddings())?;
    let file = AnchorFile {
        embeddings: Some(PathBuf::from(vaef)),
        entries: anchors.entries().to_vec(),
    };
    let path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&file).expect("anchor file serializes") + "\n";
    fs::write(&path, text).map_err(|e| Error::from(e).at(&path))
}

/// Command-count distribution of one (task, label) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub task: SpeechTask,
    pub label: DiagnosisLabel,
    pub n_sessions: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    pub mean_count: f64,
    /// Mean over sessions of the average similarity between each command and
    /// its assigned anchor; absent without an anchor set or sentence embeddings.
    pub mean_qlt: Option<f64>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Count quartiles and mean QLT per (task, label), over usable participant commands.
pub fn summarize_cohort(cohort: &Cohort, anchors: Option<&AnchorSet>) -> Result<Vec<GroupSummary>> {
    if cohort.is_empty() {
        return Err(Error::Empty("cohort"));
    }
    let mut out = Vec::new();
    for task in SpeechTask::ALL {
        for label in [DiagnosisLabel::Mci, DiagnosisLabel::Hc] {
            let group: Vec<&Session> = cohort
                .sessions()
                .iter()
                .filter(|s| s.task == task && s.label() == label)
                .collect();
            if group.is_empty() {
                continue;
            }
            let mut counts: Vec<f64> = group.iter().map(|s| participant_command_count(s) as f64).collect();
            counts.sort_by(f64::total_cmp);
            let mean_qlt = match anchors {
                Some(a) => {
                    let mut acc = Vec::new();
                    for s in &group {
                        let Some(q) = session_mean_similarity(s, a)? else {
                            acc.clear();
                            break;
                        };
                        acc.push(q);
                    }
                    (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
                }
                None => None,
            };
            let (q1, q3) = (quantile(&counts, 0.25), quantile(&counts, 0.75));
            out.push(GroupSummary {
                task,
                label,
                n_sessions: group.len(),
                min: counts[0],
                q1,
                median: quantile(&counts, 0.5),
                q3,
                max: counts[counts.len() - 1],
                iqr: q3 - q1,
                mean_count: counts.iter().sum::<f64>() / counts.len() as f64,
                mean_qlt,
            });
        }
    }
    Ok(out)
}

fn session_mean_similarity(s: &Session, anchors: &AnchorSet) -> Result<Option<f64>> {
    if s.embeddings.sentence.is_none() {
        return Ok(None);
    }
    let clean = match preprocess(s) {
        Ok(c) => c,
        Err(Error::EmptySession) => return Ok(None),
        Err(e) => return Err(e),
    };
    let f = intent_features::<f64>(anchors, clean.embeddings.sentence.as_ref().expect("checked above"))?;
    let m = f.command_count() as f64;
    Ok(Some(
        f.qty.iter().zip(&f.qlt).map(|(&q, &l)| q as f64 * l).sum::<f64>() / m,
    ))
}
