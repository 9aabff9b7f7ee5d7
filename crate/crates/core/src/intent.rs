//! Intent features: how many collected commands land on each anchor command
//! (quantity) and how closely they match it on average (quality).
//!
//! Every collected command is assigned to the anchor it is most similar to,
//! ties going to the lowest anchor index, so the quantities always sum to the
//! number of collected commands.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{read_embedding_path, EmbeddingMatrix};
use crate::model::Category;
use crate::scalar::Scalar;

/// Anchor count of the reference command catalog.
pub const PAPER_ANCHOR_COUNT: usize = 34;

const DEFAULT_ANCHORS: &str = include_str!("../data/default_anchors.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorEntry {
    pub anchor_text: String,
    pub intent_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

/// On-disk anchor description; `embeddings` points at a VAEF file relative to the anchor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    pub entries: Vec<AnchorEntry>,
}

/// The 34-entry command/intent catalog shipped with the crate (no embeddings).
pub fn default_anchor_entries() -> Vec<AnchorEntry> {
    let file: AnchorFile = serde_json::from_str(DEFAULT_ANCHORS).expect("bundled anchor file parses");
    file.entries
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    entries: Vec<AnchorEntry>,
    embeddings: EmbeddingMatrix,
}

impl AnchorSet {
    pub fn new(entries: Vec<AnchorEntry>, embeddings: EmbeddingMatrix) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("anchor set"));
        }
        if embeddings.rows() != entries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} anchor entries but {} embedding rows",
                entries.len(),
                embeddings.rows()
            )));
        }
        if let Some(i) = embeddings.iter_rows().position(|r| squared_norm(r) == 0.0) {
            return Err(Error::ZeroNorm(i));
        }
        Ok(AnchorSet {
            entries,
            embeddings,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).at(path))?;
        let file: AnchorFile = serde_json::from_str(&text).map_err(|e| {
            Error::ManifestSyntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
            .at(path)
        })?;
        let rel = file
            .embeddings
            .ok_or_else(|| Error::MissingField("embeddings".into()).at(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let embeddings = read_embedding_path(&base.join(rel))?;
        AnchorSet::new(file.entries, embeddings).map_err(|e| e.at(path))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AnchorEntry] {
        &self.entries
    }

    pub fn embeddings(&self) -> &EmbeddingMatrix {
        &self.embeddings
    }
}

/// Per-anchor counts and mean similarities of the commands assigned to each anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentFeatureVector<T> {
    pub qty: Vec<u32>,
    pub qlt: Vec<T>,
}

impl<T: Scalar> IntentFeatureVector<T> {
    /// Quantities followed by qualities.
    pub fn to_values(&self) -> Vec<T> {
        self.qty
            .iter()
            .map(|&q| T::of(q as f64))
            .chain(self.qlt.iter().copied())
            .collect()
    }

    pub fn command_count(&self) -> usize {
        self.qty.iter().map(|&q| q as usize).sum()
    }
}

fn squared_norm<E: Scalar>(v: &[E]) -> f64 {
    v.iter().map(|x| x.as_f64() * x.as_f64()).sum()
}

/// Cosine with `f64` accumulation, clamped to [-1, 1]; `None` when either norm is zero.
fn cosine_f64<E: Scalar>(a: &[E], b: &[E]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x.as_f64(), y.as_f64());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if squared_norm(a) == 0.0 {
        return Err(Error::ZeroNorm(0));
    }
    cosine_f64(a, b).map(T::of).ok_or(Error::ZeroNorm(1))
}

/// `m × n` matrix whose entry `(j, i)` is the cosine between command `j` and anchor `i`.
pub fn similarity_matrix<T: Scalar>(
    anchors: &AnchorSet,
    commands: &EmbeddingMatrix,
) -> Result<Array2<T>> {
    let a = anchors.embeddings();
    if a.cols() != commands.cols() {
        return Err(Error::DimensionMismatch(format!(
            "anchor width {} vs command width {}",
            a.cols(),
            commands.cols()
        )));
    }
    let mut sim = Array2::from_elem((commands.rows(), a.rows()), T::zero());
    for (j, c) in commands.iter_rows().enumerate() {
        if squared_norm(c) == 0.0 {
            return Err(Error::ZeroNorm(j));
        }
        for (i, anchor) in a.iter_rows().enumerate() {
            sim[[j, i]] = T::of(cosine_f64(c, anchor).expect("norms checked"));
        }
    }
    Ok(sim)
}

/// Best anchor per command row; the lowest index wins exact ties.
pub fn assign_commands<T: Scalar>(sim: ArrayView2<'_, T>) -> Vec<usize> {
    sim.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

pub fn intent_features_from_similarity<T: Scalar>(sim: ArrayView2<'_, T>) -> IntentFeatureVector<T> {
    let n = sim.ncols();
    let mut qty = vec![0u32; n];
    let mut sums = vec![0.0f64; n];
    for (j, i) in assign_commands(sim).into_iter().enumerate() {
        qty[i] += 1;
        sums[i] += sim[[j, i]].as_f64();
    }
    let qlt = qty
        .iter()
        .zip(&sums)
        .map(|(&c, &s)| if c == 0 { T::zero() } else { T::of(s / c as f64) })
        .collect();
    IntentFeatureVector { qty, qlt }
}

pub fn intent_features<T: Scalar>(
    anchors: &AnchorSet,
    commands: &EmbeddingMatrix,
) -> Result<IntentFeatureVector<T>> {
    let sim = similarity_matrix::<T>(anchors, commands)?;
    Ok(intent_features_from_similarity(sim.view()))
}

/// Width of the concatenated quantity and quality features.
pub fn intent_feature_dim(anchors: &AnchorSet) -> usize {
    2 * anchors.len()
}
