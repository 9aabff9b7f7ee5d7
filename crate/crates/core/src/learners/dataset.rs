use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::scalar::Scalar;

/// Classification labels or regression values, one per sample.
///
/// Also the output type of [`predict`](super::predict).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets<T> {
    Labels(Vec<DiagnosisLabel>),
    Values(Vec<T>),
}

impl<T: Clone> Targets<T> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Labels(v) => v.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        match self {
            Targets::Labels(v) => Targets::Labels(idx.iter().map(|&i| v[i]).collect()),
            Targets::Values(v) => Targets::Values(idx.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    pub fn labels(&self) -> Option<&[DiagnosisLabel]> {
        match self {
            Targets::Labels(v) => Some(v),
            Targets::Values(_) => None,
        }
    }

    pub fn values(&self) -> Option<&[T]> {
        match self {
            Targets::Values(v) => Some(v),
            Targets::Labels(_) => None,
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self, Targets::Labels(_))
    }
}

/// Design matrix with targets and the participant each row came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Array2<T>,
    y: Targets<T>,
    groups: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Array2<T>, y: Targets<T>, groups: Vec<String>) -> Result<Self> {
        if y.len() != x.nrows() || groups.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows, {} targets, {} groups",
                x.nrows(),
                y.len(),
                groups.len()
            )));
        }
        if let Some(((r, c), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row: r, col: c });
        }
        if let Targets::Values(v) = &y {
            if let Some(r) = v.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r, col: x.ncols() });
            }
        }
        Ok(Dataset { x, y, groups })
    }

    /// Convenience constructor where every row is its own group.
    pub fn ungrouped(x: Array2<T>, y: Targets<T>) -> Result<Self> {
        let groups = (0..x.nrows()).map(|i| i.to_string()).collect();
        Self::new(x, y, groups)
    }

    pub fn x(&self) -> ArrayView2<'_, T> {
        self.x.view()
    }

    pub fn y(&self) -> &Targets<T> {
        &self.y
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Dataset {
            x: self.x.select(Axis(0), idx),
            y: self.y.select(idx),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }

    /// Same rows with different targets (e.g. another MoCA subdomain).
    pub fn with_targets(&self, y: Targets<T>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.groups.clone())
    }
}
