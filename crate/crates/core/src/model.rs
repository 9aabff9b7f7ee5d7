//! Domain types shared across the pipeline and the MoCA labeling rule.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EmbeddingMatrix;

/// MoCA total at or above which a session is labeled healthy.
pub const HC_THRESHOLD: u8 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Participant,
    Assistant,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Information,
    Entertainment,
    Productivity,
    Shopping,
    Communication,
    SmartHome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandStatus {
    Ok,
    AsrError,
    Unmatched,
}

/// One utterance addressed to the voice assistant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub command_id: String,
    pub speaker: Speaker,
    pub transcript: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    pub status: CommandStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_row: Option<u32>,
}

impl Command {
    pub fn validate(&self) -> Result<()> {
        if self.status == CommandStatus::Ok {
            if self.embedding_row.is_none() {
                return Err(Error::InvalidField {
                    field: format!("commands[{}].embedding_row", self.command_id),
                    message: "required when status is ok".into(),
                });
            }
            if self.transcript.trim().is_empty() {
                return Err(Error::InvalidField {
                    field: format!("commands[{}].transcript", self.command_id),
                    message: "must be nonempty when status is ok".into(),
                });
            }
        }
        Ok(())
    }

    pub fn is_usable(&self) -> bool {
        self.speaker == Speaker::Participant && self.status == CommandStatus::Ok
    }
}

/// A MoCA score or one of its six index scores, each a regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MocaTarget {
    Memory,
    ExecutiveFunction,
    Attention,
    Language,
    Visuospatial,
    Orientation,
    Total,
}

impl MocaTarget {
    pub const ALL: [MocaTarget; 7] = [
        MocaTarget::Memory,
        MocaTarget::ExecutiveFunction,
        MocaTarget::Attention,
        MocaTarget::Language,
        MocaTarget::Visuospatial,
        MocaTarget::Orientation,
        MocaTarget::Total,
    ];

    pub const SUBDOMAINS: [MocaTarget; 6] = [
        MocaTarget::Memory,
        MocaTarget::ExecutiveFunction,
        MocaTarget::Attention,
        MocaTarget::Language,
        MocaTarget::Visuospatial,
        MocaTarget::Orientation,
    ];

    pub fn max(self) -> u8 {
        match self {
            MocaTarget::Total => 30,
            MocaTarget::Memory => 15,
            MocaTarget::ExecutiveFunction => 13,
            MocaTarget::Attention => 18,
            MocaTarget::Language => 6,
            MocaTarget::Visuospatial => 7,
            MocaTarget::Orientation => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MocaTarget::Total => "total",
            MocaTarget::Memory => "memory",
            MocaTarget::ExecutiveFunction => "executive_function",
            MocaTarget::Attention => "attention",
            MocaTarget::Language => "language",
            MocaTarget::Visuospatial => "visuospatial",
            MocaTarget::Orientation => "orientation",
        }
    }
}

impl fmt::Display for MocaTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MocaTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MocaTarget::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown MoCA target `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct RawMoca {
    total: i64,
    memory: i64,
    executive_function: i64,
    attention: i64,
    language: i64,
    visuospatial: i64,
    orientation: i64,
}

/// Validated MoCA total and index scores.
///
/// Index scores are stored independently of the total; no sum relation is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMoca", into = "RawMoca")]
pub struct MocaAssessment {
    scores: [u8; 7],
}

impl MocaAssessment {
    pub fn new(
        total: i64,
        memory: i64,
        executive_function: i64,
        attention: i64,
        language: i64,
        visuospatial: i64,
        orientation: i64,
    ) -> Result<Self> {
        let raw = [
            memory,
            executive_function,
            attention,
            language,
            visuospatial,
            orientation,
            total,
        ];
        let mut scores = [0u8; 7];
        for ((slot, value), target) in scores.iter_mut().zip(raw).zip(MocaTarget::ALL) {
            if value < 0 || value > target.max() as i64 {
                return Err(Error::MocaOutOfRange {
                    field: target.name(),
                    value,
                    max: target.max(),
                });
            }
            *slot = value as u8;
        }
        Ok(MocaAssessment { scores })
    }

    pub fn score(&self, target: MocaTarget) -> u8 {
        self.scores[MocaTarget::ALL.iter().position(|&t| t == target).unwrap()]
    }

    pub fn total(&self) -> u8 {
        self.score(MocaTarget::Total)
    }
}

impl TryFrom<RawMoca> for MocaAssessment {
    type Error = Error;

    fn try_from(r: RawMoca) -> Result<Self> {
        MocaAssessment::new(
            r.total,
            r.memory,
            r.executive_function,
            r.attention,
            r.language,
            r.visuospatial,
            r.orientation,
        )
    }
}

impl From<MocaAssessment> for RawMoca {
    fn from(m: MocaAssessment) -> Self {
        let s = |t| m.score(t) as i64;
        RawMoca {
            total: s(MocaTarget::Total),
            memory: s(MocaTarget::Memory),
            executive_function: s(MocaTarget::ExecutiveFunction),
            attention: s(MocaTarget::Attention),
            language: s(MocaTarget::Language),
            visuospatial: s(MocaTarget::Visuospatial),
            orientation: s(MocaTarget::Orientation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosisLabel {
    #[serde(rename = "MCI")]
    Mci,
    #[serde(rename = "HC")]
    Hc,
}

impl DiagnosisLabel {
    pub fn other(self) -> Self {
        match self {
            DiagnosisLabel::Mci => DiagnosisLabel::Hc,
            DiagnosisLabel::Hc => DiagnosisLabel::Mci,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosisLabel::Mci => "MCI",
            DiagnosisLabel::Hc => "HC",
        }
    }
}

impl fmt::Display for DiagnosisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiagnosisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MCI" => Ok(DiagnosisLabel::Mci),
            "HC" => Ok(DiagnosisLabel::Hc),
            _ => Err(Error::InvalidField {
                field: "label".into(),
                message: format!("expected MCI or HC, got `{s}`"),
            }),
        }
    }
}

pub fn label_from_moca(moca: &MocaAssessment) -> DiagnosisLabel {
    if moca.total() >= HC_THRESHOLD {
        DiagnosisLabel::Hc
    } else {
        DiagnosisLabel::Mci
    }
}

/// Reading fixed commands vs. generating commands from intent keywords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeechTask {
    Reading,
    Generation,
}

impl SpeechTask {
    pub const ALL: [SpeechTask; 2] = [SpeechTask::Reading, SpeechTask::Generation];

    pub fn as_str(self) -> &'static str {
        match self {
            SpeechTask::Reading => "reading",
            SpeechTask::Generation => "generation",
        }
    }
}

impl fmt::Display for SpeechTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpeechTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reading" => Ok(SpeechTask::Reading),
            "generation" => Ok(SpeechTask::Generation),
            _ => Err(Error::InvalidField {
                field: "task".into(),
                message: format!("expected reading or generation, got `{s}`"),
            }),
        }
    }
}

/// Per-command embedding matrices attached to a session, indexed by `Command::embedding_row`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionEmbeddings {
    pub audio: Option<EmbeddingMatrix>,
    pub textual: Option<EmbeddingMatrix>,
    /// Sentence-encoder embeddings, matched against the anchor set for intent features.
    pub sentence: Option<EmbeddingMatrix>,
}

impl SessionEmbeddings {
    pub fn attached(&self) -> impl Iterator<Item = (&'static str, &EmbeddingMatrix)> {
        [
            ("audio", self.audio.as_ref()),
            ("textual", self.textual.as_ref()),
            ("sentence", self.sentence.as_ref()),
        ]
        .into_iter()
        .filter_map(|(name, m)| m.map(|m| (name, m)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub participant_id: String,
    pub session_index: u8,
    pub task: SpeechTask,
    pub commands: Vec<Command>,
    pub moca: MocaAssessment,
    pub embeddings: SessionEmbeddings,
}

impl Session {
    pub fn label(&self) -> DiagnosisLabel {
        label_from_moca(&self.moca)
    }
}

/// Number of commands spoken by the participant and recognized without error.
pub fn participant_command_count(session: &Session) -> usize {
    session.commands.iter().filter(|c| c.is_usable()).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Ingested,
    Simulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    sessions: Vec<Session>,
    pub provenance: Provenance,
}

impl Cohort {
    pub fn new(sessions: Vec<Session>, provenance: Provenance) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &sessions {
            if !seen.insert((s.participant_id.as_str(), s.session_index, s.task)) {
                return Err(Error::DuplicateSession {
                    participant: s.participant_id.clone(),
                    session_index: s.session_index,
                    task: s.task.to_string(),
                });
            }
        }
        Ok(Cohort {
            sessions,
            provenance,
        })
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn into_sessions(self) -> Vec<Session> {
        self.sessions
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}
