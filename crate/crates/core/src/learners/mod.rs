//! Classifiers and regressors trained on fused session features.

mod dataset;
mod forest;
mod knn;
mod linalg;
mod linear;
mod params;
mod smo;
mod standardize;
mod tree;

use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use dataset::{Dataset, Targets};
pub use forest::{majority_vote, train_random_forest, RandomForest};
pub use knn::{train_knn, Knn};
pub use linalg::{solve_cholesky, solve_lu};
pub use linear::{train_linear_svm, train_ridge, train_svr, LinearFunction, LinearSvm, Ridge, SolverInfo, Svr};
pub use params::{ForestParams, Hyperparams, KnnParams, ModelKind, RidgeParams, SvmParams, SvrParams, TreeParams};
pub use standardize::Standardizer;
pub use tree::{train_decision_tree, DecisionTree, LeafValue, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum TrainedModel<T> {
    DecisionTree(DecisionTree<T>),
    RandomForest(RandomForest<T>),
    Knn(Knn<T>),
    LinearSvm(LinearSvm<T>),
    Ridge(Ridge<T>),
    Svr(Svr<T>),
}

impl<T: Scalar> TrainedModel<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::DecisionTree(_) => ModelKind::DecisionTree,
            TrainedModel::RandomForest(_) => ModelKind::RandomForest,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::LinearSvm(_) => ModelKind::LinearSvm,
            TrainedModel::Ridge(_) => ModelKind::Ridge,
            TrainedModel::Svr(_) => ModelKind::Svr,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::DecisionTree(m) => m.n_features(),
            TrainedModel::RandomForest(m) => m.n_features(),
            TrainedModel::Knn(m) => m.n_features(),
            TrainedModel::LinearSvm(m) => m.function.n_features(),
            TrainedModel::Ridge(m) => m.function.n_features(),
            TrainedModel::Svr(m) => m.function.n_features(),
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, T>) -> Result<Targets<T>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.ncols()
            )));
        }
        let rows = x.rows().into_iter();
        Ok(match self {
            TrainedModel::DecisionTree(m) => {
                let leaves: Vec<_> = rows.map(|r| m.predict_row(r).clone()).collect();
                match leaves.first() {
                    Some(LeafValue::Value(_)) => Targets::Values(
                        leaves
                            .into_iter()
                            .map(|l| match l {
                                LeafValue::Value(v) => v,
                                LeafValue::Label(_) => unreachable!(),
                            })
                            .collect(),
                    ),
                    _ => Targets::Labels(
                        leaves
                            .into_iter()
                            .map(|l| match l {
                                LeafValue::Label(l) => l,
                                LeafValue::Value(_) => unreachable!(),
                            })
                            .collect(),
                    ),
                }
            }
            TrainedModel::RandomForest(m) => Targets::Labels(rows.map(|r| m.predict_row(r)).collect()),
            TrainedModel::Knn(m) => Targets::Labels(rows.map(|r| m.predict_row(r)).collect()),
            TrainedModel::LinearSvm(m) => Targets::Labels(rows.map(|r| m.predict_row(r)).collect()),
            TrainedModel::Ridge(m) => Targets::Values(rows.map(|r| T::of(m.function.decision(r))).collect()),
            TrainedModel::Svr(m) => Targets::Values(rows.map(|r| T::of(m.function.decision(r))).collect()),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::from(e).at(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).at(path))?;
        serde_json::from_slice(&bytes).map_err(|e| {
            Error::ManifestSyntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
            .at(path)
        })
    }
}

/// Fits the model described by `params`. `seed` drives every random choice
/// (forest bootstraps and feature draws); deterministic learners record it only.
pub fn train<T: Scalar>(data: &Dataset<T>, params: &Hyperparams, seed: u64) -> Result<TrainedModel<T>> {
    params.validate()?;
    let classification = data.y().is_classification();
    let kind = params.kind();
    if classification && !kind.supports_classification() || !classification && !kind.supports_regression() {
        return Err(Error::InvalidHyperparameter(format!(
            "{kind} does not support {}",
            if classification { "classification" } else { "regression" }
        )));
    }
    Ok(match params {
        Hyperparams::DecisionTree(p) => TrainedModel::DecisionTree(train_decision_tree(data, p)?),
        Hyperparams::RandomForest(p) => TrainedModel::RandomForest(train_random_forest(data, p, seed)?),
        Hyperparams::Knn(p) => TrainedModel::Knn(train_knn(data, p)?),
        Hyperparams::LinearSvm(p) => TrainedModel::LinearSvm(train_linear_svm(data, p, seed)?),
        Hyperparams::Ridge(p) => TrainedModel::Ridge(train_ridge(data, p)?),
        Hyperparams::Svr(p) => TrainedModel::Svr(train_svr(data, p, seed)?),
    })
}
