use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn features_per_split(&self, d: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// Relative primal-dual gap at which the solver stops; also the first
    /// KKT-violation threshold it tries.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-4,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RidgeParams {
    pub lambda: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        RidgeParams { lambda: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            tol: 1e-4,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Hyperparams {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    Knn(KnnParams),
    LinearSvm(SvmParams),
    Ridge(RidgeParams),
    Svr(SvrParams),
}

impl Hyperparams {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::DecisionTree(_) => ModelKind::DecisionTree,
            Hyperparams::RandomForest(_) => ModelKind::RandomForest,
            Hyperparams::Knn(_) => ModelKind::Knn,
            Hyperparams::LinearSvm(_) => ModelKind::LinearSvm,
            Hyperparams::Ridge(_) => ModelKind::Ridge,
            Hyperparams::Svr(_) => ModelKind::Svr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidHyperparameter(m.to_string()));
        match *self {
            Hyperparams::DecisionTree(p) if p.min_samples_split < 2 => bad("min_samples_split must be at least 2"),
            Hyperparams::RandomForest(p) if p.n_trees == 0 => bad("n_trees must be positive"),
            Hyperparams::RandomForest(p) if p.min_samples_split < 2 => bad("min_samples_split must be at least 2"),
            Hyperparams::RandomForest(ForestParams { max_features: Some(0), .. }) => bad("max_features must be positive"),
            Hyperparams::Knn(p) if p.k < 1 => bad("k must be at least 1"),
            Hyperparams::LinearSvm(p) if !(p.c > 0.0) => bad("C must be positive"),
            Hyperparams::LinearSvm(p) if !(p.tol > 0.0) => bad("tol must be positive"),
            Hyperparams::Ridge(p) if !(p.lambda >= 0.0) => bad("lambda must be nonnegative"),
            Hyperparams::Svr(p) if !(p.c > 0.0) => bad("C must be positive"),
            Hyperparams::Svr(p) if !(p.epsilon >= 0.0) => bad("epsilon must be nonnegative"),
            Hyperparams::Svr(p) if !(p.tol > 0.0) => bad("tol must be positive"),
            _ => Ok(()),
        }
    }

    /// Compact `name=value` rendering for reports.
    pub fn describe(&self) -> String {
        let depth = |d: Option<usize>| d.map_or("inf".to_string(), |d| d.to_string());
        match self {
            Hyperparams::DecisionTree(p) => format!("max_depth={}", depth(p.max_depth)),
            Hyperparams::RandomForest(p) => format!("n_trees={} max_depth={}", p.n_trees, depth(p.max_depth)),
            Hyperparams::Knn(p) => format!("k={}", p.k),
            Hyperparams::LinearSvm(p) => format!("C={}", p.c),
            Hyperparams::Ridge(p) => format!("lambda={}", p.lambda),
            Hyperparams::Svr(p) => format!("C={} epsilon={}", p.c, p.epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "SVM")]
    LinearSvm,
    #[serde(rename = "LRR")]
    Ridge,
    #[serde(rename = "SVR")]
    Svr,
}

impl ModelKind {
    pub const CLASSIFIERS: [ModelKind; 4] = [
        ModelKind::DecisionTree,
        ModelKind::LinearSvm,
        ModelKind::Knn,
        ModelKind::RandomForest,
    ];
    pub const REGRESSORS: [ModelKind; 3] = [ModelKind::DecisionTree, ModelKind::Svr, ModelKind::Ridge];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "DT",
            ModelKind::RandomForest => "RF",
            ModelKind::Knn => "KNN",
            ModelKind::LinearSvm => "SVM",
            ModelKind::Ridge => "LRR",
            ModelKind::Svr => "SVR",
        }
    }

    pub fn supports_classification(self) -> bool {
        Self::CLASSIFIERS.contains(&self)
    }

    pub fn supports_regression(self) -> bool {
        Self::REGRESSORS.contains(&self)
    }

    pub fn default_params(self) -> Hyperparams {
        match self {
            ModelKind::DecisionTree => Hyperparams::DecisionTree(TreeParams::default()),
            ModelKind::RandomForest => Hyperparams::RandomForest(ForestParams::default()),
            ModelKind::Knn => Hyperparams::Knn(KnnParams::default()),
            ModelKind::LinearSvm => Hyperparams::LinearSvm(SvmParams::default()),
            ModelKind::Ridge => Hyperparams::Ridge(RidgeParams::default()),
            ModelKind::Svr => Hyperparams::Svr(SvrParams::default()),
        }
    }

    /// The inner-loop search grid, in declaration order.
    pub fn default_grid(self) -> Vec<Hyperparams> {
        const DEPTHS: [Option<usize>; 4] = [Some(3), Some(5), Some(10), None];
        const STRENGTHS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];
        match self {
            ModelKind::DecisionTree => DEPTHS
                .iter()
                .map(|&max_depth| Hyperparams::DecisionTree(TreeParams { max_depth, ..Default::default() }))
                .collect(),
            ModelKind::RandomForest => DEPTHS
                .iter()
                .map(|&max_depth| Hyperparams::RandomForest(ForestParams { max_depth, ..Default::default() }))
                .collect(),
            ModelKind::Knn => [3, 5, 7, 9].iter().map(|&k| Hyperparams::Knn(KnnParams { k })).collect(),
            ModelKind::LinearSvm => STRENGTHS
                .iter()
                .map(|&c| Hyperparams::LinearSvm(SvmParams { c, ..Default::default() }))
                .collect(),
            ModelKind::Ridge => STRENGTHS
                .iter()
                .map(|&lambda| Hyperparams::Ridge(RidgeParams { lambda }))
                .collect(),
            ModelKind::Svr => STRENGTHS
                .iter()
                .map(|&c| Hyperparams::Svr(SvrParams { c, ..Default::default() }))
                .collect(),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            ModelKind::DecisionTree,
            ModelKind::RandomForest,
            ModelKind::Knn,
            ModelKind::LinearSvm,
            ModelKind::Ridge,
            ModelKind::Svr,
        ];
        all.into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}
