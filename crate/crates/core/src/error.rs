use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Unreadable or malformed input.
    Input,
    /// Well-formed input that violates a contract.
    Validation,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic {found:?}, expected \"VAEF\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported VAEF version {0}")]
    UnsupportedVersion(u16),
    #[error("unsupported VAEF dtype code {0}")]
    UnsupportedDtype(u8),
    #[error("nonzero reserved byte {0} in VAEF header")]
    BadReserved(u8),
    #[error("truncated VAEF header: {0} of 16 bytes")]
    TruncatedHeader(usize),
    #[error("truncated VAEF payload: header declares {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} trailing bytes after VAEF payload")]
    TrailingBytes(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("manifest parse error at line {line}, column {column}: {message}")]
    ManifestSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },
    #[error("MoCA {field} = {value} outside [0, {max}]")]
    MocaOutOfRange {
        field: &'static str,
        value: i64,
        max: u8,
    },
    #[error("duplicate command_id `{0}`")]
    DuplicateCommand(String),
    #[error("duplicate session ({participant}, {session_index}, {task})")]
    DuplicateSession {
        participant: String,
        session_index: u8,
        task: String,
    },
    #[error("session has no usable participant commands after preprocessing")]
    EmptySession,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("zero-norm vector at row {0}")]
    ZeroNorm(usize),
    #[error("missing {0} component for the requested feature mode")]
    MissingComponent(&'static str),
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("singular linear system")]
    Singular,

    #[error("cannot build {k} folds from {groups} participant groups")]
    TooFewGroups { k: usize, groups: usize },
    #[error("inner fold leaked outer test sample {0}")]
    Leakage(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    AtPath {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at(self, path: impl Into<PathBuf>) -> Self {
        Error::AtPath {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            AtPath { source, .. } => source.class(),
            BadMagic { .. }
            | UnsupportedVersion(_)
            | UnsupportedDtype(_)
            | BadReserved(_)
            | TruncatedHeader(_)
            | TruncatedPayload { .. }
            | TrailingBytes(_)
            | NonFinite { .. }
            | ManifestSyntax { .. }
            | MissingField(_)
            | Io(_)
            | Csv(_) => ErrorClass::Input,
            Leakage(_) => ErrorClass::Internal,
            _ => ErrorClass::Validation,
        }
    }
}
