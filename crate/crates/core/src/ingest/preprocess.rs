use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CommandStatus, Session, SessionEmbeddings, Speaker};

/// Typical number of usable commands per session; outside it only a warning is logged.
pub const TYPICAL_COMMAND_RANGE: (usize, usize) = (30, 65);

/// Why commands were removed by [`preprocess`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropCounts {
    /// Spoken by the research assistant or a bystander.
    pub non_participant: usize,
    pub asr_error: usize,
    pub unmatched: usize,
    /// `ok` commands whose row is missing from an attached modality.
    pub unresolvable: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.non_participant + self.asr_error + self.unmatched + self.unresolvable
    }
}

/// [`preprocess`] plus a breakdown of what was dropped.
pub fn preprocess_with_counts(session: &Session) -> Result<(Session, DropCounts)> {
    let mut drops = DropCounts::default();
    let mut kept = Vec::new();
    let mut rows = Vec::new();

    for command in &session.commands {
        if command.speaker != Speaker::Participant {
            drops.non_participant += 1;
            continue;
        }
        match command.status {
            CommandStatus::AsrError => {
                drops.asr_error += 1;
                continue;
            }
            CommandStatus::Unmatched => {
                drops.unmatched += 1;
                continue;
            }
            CommandStatus::Ok => {}
        }
        let row = match command.embedding_row {
            Some(r) => r as usize,
            None => {
                drops.unresolvable += 1;
                continue;
            }
        };
        if session.embeddings.attached().any(|(_, m)| row >= m.rows()) {
            drops.unresolvable += 1;
            continue;
        }
        let mut c = command.clone();
        c.embedding_row = Some(kept.len() as u32);
        kept.push(c);
        rows.push(row);
    }

    if kept.is_empty() {
        return Err(Error::EmptySession);
    }
    let (lo, hi) = TYPICAL_COMMAND_RANGE;
    if kept.len() < lo || kept.len() > hi {
        log::warn!(
            "session {}/{}/{} keeps {} commands, outside the typical [{lo}, {hi}]",
            session.participant_id,
            session.session_index,
            session.task,
            kept.len()
        );
    }

    let slice = |m: &Option<crate::ingest::EmbeddingMatrix>| m.as_ref().map(|m| m.select_rows(&rows));
    let out = Session {
        commands: kept,
        embeddings: SessionEmbeddings {
            audio: slice(&session.embeddings.audio),
            textual: slice(&session.embeddings.textual),
            sentence: slice(&session.embeddings.sentence),
        },
        ..session.clone()
    };
    Ok((out, drops))
}

/// Keeps the participant's recognized commands whose embeddings resolve in
/// every attached modality, preserving order, and re-slices the matrices so
/// surviving command `k` owns row `k`.
pub fn preprocess(session: &Session) -> Result<Session> {
    preprocess_with_counts(session).map(|(s, _)| s)
}
