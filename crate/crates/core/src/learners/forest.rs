use ndarray::ArrayView1;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::rng::{derive_seed, stream};
use crate::scalar::Scalar;

use super::dataset::{Dataset, Targets};
use super::params::{ForestParams, TreeParams};
use super::tree::{grow_nodes, DecisionTree, GrowConfig, LeafValue, Response};

/// Bagged CART classifiers with per-split feature subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest<T> {
    pub params: ForestParams,
    pub seed: u64,
    /// Seed each tree's bootstrap and feature draws came from.
    pub tree_seeds: Vec<u64>,
    trees: Vec<DecisionTree<T>>,
}

/// Majority vote; ties go to MCI.
pub fn majority_vote(votes: impl IntoIterator<Item = DiagnosisLabel>) -> DiagnosisLabel {
    let (mci, hc) = votes.into_iter().fold((0usize, 0usize), |(m, h), v| match v {
        DiagnosisLabel::Mci => (m + 1, h),
        DiagnosisLabel::Hc => (m, h + 1),
    });
    if hc > mci {
        DiagnosisLabel::Hc
    } else {
        DiagnosisLabel::Mci
    }
}

impl<T: Scalar> RandomForest<T> {
    pub fn trees(&self) -> &[DecisionTree<T>] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> DiagnosisLabel {
        majority_vote(self.trees.iter().map(|t| match t.predict_row(row) {
            LeafValue::Label(l) => *l,
            LeafValue::Value(_) => unreachable!("forest trees are classifiers"),
        }))
    }
}

pub fn train_random_forest<T: Scalar>(
    data: &Dataset<T>,
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest<T>> {
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if !matches!(data.y(), Targets::Labels(_)) {
        return Err(Error::InvalidHyperparameter(
            "random forest supports classification only".into(),
        ));
    }
    let n = data.len();
    let d = data.n_features();
    let y = Response::from_targets(data.y());
    let cfg = GrowConfig {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features: Some(params.features_per_split(d)),
    };
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    };

    let tree_seeds: Vec<u64> = (0..params.n_trees as u64).map(|t| derive_seed(seed, &[t])).collect();
    let trees = tree_seeds
        .iter()
        .map(|&s| {
            let mut rng = stream(s, &[]);
            let sample: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let nodes = grow_nodes(data.x(), &y, sample, &cfg, Some(&mut rng));
            DecisionTree::from_nodes(tree_params, d, nodes)
        })
        .collect();

    Ok(RandomForest {
        params: *params,
        seed,
        tree_seeds,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::train_decision_tree;
    use crate::model::DiagnosisLabel::{Hc, Mci};
    use ndarray::Array2;
    use rand::SeedableRng;

    fn noisy_data(seed: u64, n: usize, d: usize) -> Dataset<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
        let y = x
            .rows()
            .into_iter()
            .map(|r| if r[0] + 0.3 * r[1] > 0.0 { Mci } else { Hc })
            .collect();
        Dataset::ungrouped(x, Targets::Labels(y)).unwrap()
    }

    #[test]
    fn vote_rule() {
        assert_eq!(majority_vote([Mci, Hc, Mci]), Mci);
        assert_eq!(majority_vote([Hc, Hc, Mci]), Hc);
        assert_eq!(majority_vote([Hc, Mci]), Mci);
    }

    #[test]
    fn same_seed_same_forest() {
        let d = noisy_data(3, 40, 5);
        let p = ForestParams { n_trees: 15, ..Default::default() };
        let a = train_random_forest(&d, &p, 11).unwrap();
        let b = train_random_forest(&d, &p, 11).unwrap();
        assert_eq!(a, b);
        let c = train_random_forest(&d, &p, 12).unwrap();
        assert_ne!(a.tree_seeds, c.tree_seeds);
    }

    #[test]
    fn degenerate_forest_equals_tree() {
        let d = noisy_data(8, 30, 4);
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: Some(4),
            ..Default::default()
        };
        let forest = train_random_forest(&d, &p, 5).unwrap();
        let tree = train_decision_tree(&d, &TreeParams::default()).unwrap();
        assert_eq!(forest.trees()[0].nodes(), tree.nodes());
        let probe = noisy_data(99, 50, 4);
        for row in probe.x().rows() {
            assert_eq!(&LeafValue::Label(forest.predict_row(row)), tree.predict_row(row));
        }
    }

    #[test]
    fn rejects_regression_targets() {
        let d = Dataset::ungrouped(Array2::<f64>::zeros((2, 1)), Targets::Values(vec![1.0, 2.0])).unwrap();
        assert!(train_random_forest(&d, &ForestParams::default(), 0).is_err());
    }
}
