//! Session manifests: one JSON document per session visit.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    Command, MocaAssessment, MocaTarget, Session, SessionEmbeddings, SpeechTask,
};

use super::vaef::read_embedding_path;

const TOP_KEYS: [&str; 6] = [
    "participant_id",
    "session_index",
    "task",
    "moca",
    "embeddings",
    "commands",
];
const EMBEDDING_KEYS: [&str; 3] = ["audio", "textual", "sentence"];
const COMMAND_KEYS: [&str; 6] = [
    "command_id",
    "speaker",
    "transcript",
    "category",
    "status",
    "embedding_row",
];

/// Embedding file references, relative to the manifest's directory unless absolute.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EmbeddingPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audio: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub textual: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence: Option<PathBuf>,
}

/// A parsed manifest: the session (without matrices) and where its matrices live.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionManifest {
    pub session: Session,
    pub embeddings: EmbeddingPaths,
}

fn warn_unknown(obj: &Map<String, Value>, known: &[&str], context: &str) {
    for key in obj.keys().filter(|k| !known.contains(&k.as_str())) {
        log::warn!("ignoring unknown field `{key}` in {context}");
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, context: &str) -> Result<&'a Value> {
    obj.get(key).filter(|v| !v.is_null()).ok_or_else(|| {
        Error::MissingField(if context.is_empty() {
            key.to_string()
        } else {
            format!("{context}.{key}")
        })
    })
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidField {
        field: field.into(),
        message: message.into(),
    }
}

fn as_str<'a>(v: &'a Value, field: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| invalid(field, "expected a string"))
}

fn as_int(v: &Value, field: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| invalid(field, "expected an integer"))
}

fn parse_moca(v: &Value) -> Result<MocaAssessment> {
    let obj = v.as_object().ok_or_else(|| invalid("moca", "expected an object"))?;
    let keys: Vec<&str> = MocaTarget::ALL.iter().map(|t| t.name()).collect();
    warn_unknown(obj, &keys, "moca");
    let get = |t: MocaTarget| -> Result<i64> {
        as_int(required(obj, t.name(), "moca")?, &format!("moca.{}", t.name()))
    };
    MocaAssessment::new(
        get(MocaTarget::Total)?,
        get(MocaTarget::Memory)?,
        get(MocaTarget::ExecutiveFunction)?,
        get(MocaTarget::Attention)?,
        get(MocaTarget::Language)?,
        get(MocaTarget::Visuospatial)?,
        get(MocaTarget::Orientation)?,
    )
}

fn parse_embeddings(v: Option<&Value>) -> Result<EmbeddingPaths> {
    let Some(v) = v.filter(|v| !v.is_null()) else {
        return Ok(EmbeddingPaths::default());
    };
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("embeddings", "expected an object"))?;
    warn_unknown(obj, &EMBEDDING_KEYS, "embeddings");
    let path = |key: &str| -> Result<Option<PathBuf>> {
        obj.get(key)
            .filter(|v| !v.is_null())
            .map(|v| as_str(v, &format!("embeddings.{key}")).map(PathBuf::from))
            .transpose()
    };
    Ok(EmbeddingPaths {
        audio: path("audio")?,
        textual: path("textual")?,
        sentence: path("sentence")?,
    })
}

fn parse_commands(v: &Value) -> Result<Vec<Command>> {
    let list = v
        .as_array()
        .ok_or_else(|| invalid("commands", "expected a list"))?;
    let mut seen = BTreeSet::new();
    let mut commands = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let ctx = format!("commands[{i}]");
        let obj = item
            .as_object()
            .ok_or_else(|| invalid(&ctx, "expected an object"))?;
        warn_unknown(obj, &COMMAND_KEYS, &ctx);
        for key in ["command_id", "speaker", "transcript", "status"] {
            required(obj, key, &ctx)?;
        }
        let command: Command = serde_json::from_value(item.clone())
            .map_err(|e| invalid(&ctx, e.to_string()))?;
        command.validate()?;
        if !seen.insert(command.command_id.clone()) {
            return Err(Error::DuplicateCommand(command.command_id));
        }
        commands.push(command);
    }
    Ok(commands)
}

pub fn parse_manifest(bytes: &[u8]) -> Result<SessionManifest> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| Error::ManifestSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| invalid("<root>", "expected an object"))?;
    warn_unknown(obj, &TOP_KEYS, "manifest");

    let participant_id = as_str(required(obj, "participant_id", "")?, "participant_id")?;
    if participant_id.is_empty() {
        return Err(invalid("participant_id", "must be nonempty"));
    }
    let session_index = as_int(required(obj, "session_index", "")?, "session_index")?;
    if !(1..=7).contains(&session_index) {
        return Err(invalid(
            "session_index",
            format!("{session_index} outside 1..=7"),
        ));
    }
    let task: SpeechTask = as_str(required(obj, "task", "")?, "task")?.parse()?;
    let moca = parse_moca(required(obj, "moca", "")?)?;
    let embeddings = parse_embeddings(obj.get("embeddings"))?;
    let commands = parse_commands(required(obj, "commands", "")?)?;

    Ok(SessionManifest {
        session: Session {
            participant_id: participant_id.to_string(),
            session_index: session_index as u8,
            task,
            commands,
            moca,
            embeddings: SessionEmbeddings::default(),
        },
        embeddings,
    })
}

#[derive(Serialize)]
struct ManifestDoc<'a> {
    participant_id: &'a str,
    session_index: u8,
    task: SpeechTask,
    moca: MocaAssessment,
    embeddings: &'a EmbeddingPaths,
    commands: &'a [Command],
}

/// Serializes a manifest; output is deterministic for equal inputs.
pub fn write_manifest(session: &Session, embeddings: &EmbeddingPaths) -> String {
    let doc = ManifestDoc {
        participant_id: &session.participant_id,
        session_index: session.session_index,
        task: session.task,
        moca: session.moca,
        embeddings,
        commands: &session.commands,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    s.push('\n');
    s
}

/// Reads a manifest file and attaches the embedding matrices it references.
pub fn load_session(manifest_path: &Path) -> Result<Session> {
    let bytes = fs::read(manifest_path).map_err(|e| Error::from(e).at(manifest_path))?;
    let SessionManifest {
        mut session,
        embeddings,
    } = parse_manifest(&bytes).map_err(|e| e.at(manifest_path))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let load = |p: &Option<PathBuf>| p.as_ref().map(|p| read_embedding_path(&base.join(p))).transpose();
    session.embeddings = SessionEmbeddings {
        audio: load(&embeddings.audio)?,
        textual: load(&embeddings.textual)?,
        sentence: load(&embeddings.sentence)?,
    };
    Ok(session)
}
