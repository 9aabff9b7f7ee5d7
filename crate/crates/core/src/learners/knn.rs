use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::scalar::Scalar;

use super::dataset::{Dataset, Targets};
use super::forest::majority_vote;
use super::params::KnnParams;
use super::standardize::Standardizer;

/// k-nearest-neighbour classifier over standardized features.
///
/// Equal distances rank the lower training index first; tied votes go to MCI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn<T> {
    pub params: KnnParams,
    pub standardizer: Standardizer<T>,
    n_train: usize,
    /// Standardized training rows, row-major.
    train: Vec<f64>,
    labels: Vec<DiagnosisLabel>,
}

impl<T: Scalar> Knn<T> {
    pub fn n_features(&self) -> usize {
        self.standardizer.dim()
    }

    /// Training indices of the `k` nearest neighbours, nearest first.
    pub fn neighbours(&self, row: ArrayView1<'_, T>) -> Vec<usize> {
        let q = self.standardizer.transform_row(row);
        let d = q.len();
        let mut dist: Vec<(f64, usize)> = (0..self.n_train)
            .map(|i| {
                let r = &self.train[i * d..(i + 1) * d];
                (r.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        dist.into_iter().take(self.params.k).map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> DiagnosisLabel {
        majority_vote(self.neighbours(row).into_iter().map(|i| self.labels[i]))
    }
}

pub fn train_knn<T: Scalar>(data: &Dataset<T>, params: &KnnParams) -> Result<Knn<T>> {
    let Targets::Labels(labels) = data.y() else {
        return Err(Error::InvalidHyperparameter("KNN supports classification only".into()));
    };
    if params.k < 1 || params.k > data.len() {
        return Err(Error::InvalidHyperparameter(format!(
            "k = {} with {} training samples",
            params.k,
            data.len()
        )));
    }
    let standardizer = Standardizer::fit(data.x());
    let z: Array2<f64> = standardizer.transform(data.x());
    Ok(Knn {
        params: *params,
        standardizer,
        n_train: data.len(),
        train: z.iter().copied().collect(),
        labels: labels.clone(),
    })
}
