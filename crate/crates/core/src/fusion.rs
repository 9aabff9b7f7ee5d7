//! Session-level feature vectors for the seven feature sets.
//!
//! Per-command embeddings are averaged over the session, then the present
//! components are concatenated in the fixed order intent (quantities, then
//! qualities), audio, textual.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EmbeddingMatrix;
use crate::intent::{intent_features, AnchorSet, IntentFeatureVector};
use crate::model::Session;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureMode {
    Intent,
    Audio,
    Textual,
    /// Intent + audio.
    Ff1,
    /// Intent + textual.
    Ff2,
    /// Audio + textual.
    Ff3,
    /// Intent + audio + textual.
    Ff4,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 7] = [
        FeatureMode::Intent,
        FeatureMode::Audio,
        FeatureMode::Textual,
        FeatureMode::Ff1,
        FeatureMode::Ff2,
        FeatureMode::Ff3,
        FeatureMode::Ff4,
    ];

    /// Which of (intent, audio, textual) the mode concatenates.
    pub fn components(self) -> (bool, bool, bool) {
        use FeatureMode::*;
        match self {
            Intent => (true, false, false),
            Audio => (false, true, false),
            Textual => (false, false, true),
            Ff1 => (true, true, false),
            Ff2 => (true, false, true),
            Ff3 => (false, true, true),
            Ff4 => (true, true, true),
        }
    }

    pub fn as_str(self) -> &'static str {
        use FeatureMode::*;
        match self {
            Intent => "INTENT",
            Audio => "AUDIO",
            Textual => "TEXTUAL",
            Ff1 => "FF1",
            Ff2 => "FF2",
            Ff3 => "FF3",
            Ff4 => "FF4",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureMode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown feature mode `{s}`")))
    }
}

/// Widths of the three component blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDims {
    pub intent: usize,
    pub audio: usize,
    pub textual: usize,
}

impl ComponentDims {
    pub const PAPER: ComponentDims = ComponentDims {
        intent: 68,
        audio: 1024,
        textual: 768,
    };

    pub fn layout(&self, mode: FeatureMode) -> FeatureLayout {
        let (i, a, t) = mode.components();
        let mut offset = 0;
        let mut take = |present: bool, width: usize| {
            present.then(|| {
                let r = offset..offset + width;
                offset += width;
                r
            })
        };
        let intent = take(i, self.intent);
        let audio = take(a, self.audio);
        let textual = take(t, self.textual);
        FeatureLayout {
            intent,
            audio,
            textual,
            dim: offset,
        }
    }

    pub fn dim(&self, mode: FeatureMode) -> usize {
        self.layout(mode).dim
    }
}

/// Offsets of each component inside a fused vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    pub intent: Option<Range<usize>>,
    pub audio: Option<Range<usize>>,
    pub textual: Option<Range<usize>>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub mode: FeatureMode,
    pub values: Vec<T>,
}

impl<T> FeatureVector<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Column-wise mean of the rows, accumulated in `f64`.
pub fn mean_embedding<T: Scalar>(m: &EmbeddingMatrix) -> Result<Vec<T>> {
    if m.rows() == 0 {
        return Err(Error::Empty("embedding matrix has no rows"));
    }
    let mut acc = vec![0.0f64; m.cols()];
    for row in m.iter_rows() {
        for (a, &v) in acc.iter_mut().zip(row) {
            *a += v as f64;
        }
    }
    let n = m.rows() as f64;
    Ok(acc.into_iter().map(|s| T::of(s / n)).collect())
}

pub fn build_feature_vector<T: Scalar>(
    intent: Option<&IntentFeatureVector<T>>,
    audio_mean: Option<&[T]>,
    textual_mean: Option<&[T]>,
    mode: FeatureMode,
) -> Result<FeatureVector<T>> {
    let (want_intent, want_audio, want_textual) = mode.components();
    let mut values = Vec::new();
    if want_intent {
        values.extend(intent.ok_or(Error::MissingComponent("intent"))?.to_values());
    }
    if want_audio {
        values.extend_from_slice(audio_mean.ok_or(Error::MissingComponent("audio"))?);
    }
    if want_textual {
        values.extend_from_slice(textual_mean.ok_or(Error::MissingComponent("textual"))?);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: values.iter().position(|v| !v.is_finite()).unwrap() });
    }
    Ok(FeatureVector { mode, values })
}

/// Features for one preprocessed session. Intent features need the session's
/// sentence embeddings and `anchors`.
pub fn session_features<T: Scalar>(
    session: &Session,
    anchors: Option<&AnchorSet>,
    mode: FeatureMode,
) -> Result<FeatureVector<T>> {
    let (want_intent, want_audio, want_textual) = mode.components();
    let intent = if want_intent {
        let sentence = session
            .embeddings
            .sentence
            .as_ref()
            .ok_or(Error::MissingComponent("intent (sentence embeddings)"))?;
        let anchors = anchors.ok_or(Error::MissingComponent("intent (anchor set)"))?;
        Some(intent_features::<T>(anchors, sentence)?)
    } else {
        None
    };
    let mean = |want: bool, m: &Option<EmbeddingMatrix>| -> Result<Option<Vec<T>>> {
        match (want, m) {
            (true, Some(m)) => mean_embedding(m).map(Some),
            _ => Ok(None),
        }
    };
    let audio = mean(want_audio, &session.embeddings.audio)?;
    let textual = mean(want_textual, &session.embeddings.textual)?;
    build_feature_vector(intent.as_ref(), audio.as_deref(), textual.as_deref(), mode)
}
