//! CART trees: Gini impurity for classification, variance reduction for regression.
//!
//! Thresholds sit at midpoints between consecutive distinct feature values and
//! samples with `x <= threshold` go left. Among equally good splits the lowest
//! feature index wins, then the lowest threshold. A node is split whenever any
//! candidate feature varies, even if the best split does not lower impurity.

use std::cmp::Ordering;

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::rng::StreamRng;
use crate::scalar::Scalar;

use super::dataset::{Dataset, Targets};
use super::params::TreeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafValue<T> {
    Label(DiagnosisLabel),
    Value(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<T> {
    Leaf {
        value: LeafValue<T>,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub params: TreeParams,
    n_features: usize,
    nodes: Vec<Node<T>>,
}

/// Class index 0 is MCI, so majority ties resolve to MCI.
fn class_index(l: DiagnosisLabel) -> usize {
    match l {
        DiagnosisLabel::Mci => 0,
        DiagnosisLabel::Hc => 1,
    }
}

pub(crate) enum Response {
    Class(Vec<usize>),
    Real(Vec<f64>),
}

impl Response {
    pub(crate) fn from_targets<T: Scalar>(y: &Targets<T>) -> Self {
        match y {
            Targets::Labels(l) => Response::Class(l.iter().map(|&l| class_index(l)).collect()),
            Targets::Values(v) => Response::Real(v.iter().map(|v| v.as_f64()).collect()),
        }
    }
}

/// Split quality. Gini is compared exactly so that mathematically tied
/// splits really tie and the first candidate wins; within-node squared error
/// counts as tied when within a relative 1e-12.
enum SplitScore {
    /// Minimizing weighted Gini is maximizing `Σ_side (a² + b²) / n_side`,
    /// held as the fraction `num / den` over integers.
    Gini { num: u128, den: u128 },
    Sse(f64),
}

impl SplitScore {
    fn gini(left: [usize; 2], right: [usize; 2]) -> Self {
        let sq = |c: [usize; 2]| (c[0] * c[0] + c[1] * c[1]) as u128;
        let (nl, nr) = ((left[0] + left[1]) as u128, (right[0] + right[1]) as u128);
        SplitScore::Gini {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn better_than(&self, other: &SplitScore) -> bool {
        match (self, other) {
            (SplitScore::Gini { num: a, den: b }, SplitScore::Gini { num: c, den: d }) => a * d > c * b,
            (SplitScore::Sse(a), SplitScore::Sse(b)) => *a < *b - 1e-12 * b.abs().max(1e-300),
            _ => unreachable!("one response kind per tree"),
        }
    }
}

pub(crate) struct GrowConfig {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` evaluates every feature.
    pub max_features: Option<usize>,
}

struct Grower<'a, T> {
    x: ArrayView2<'a, T>,
    y: &'a Response,
    cfg: &'a GrowConfig,
    rng: Option<&'a mut StreamRng>,
    nodes: Vec<Node<T>>,
    sorted: Vec<(T, usize)>,
}

impl<T: Scalar> Grower<'_, T> {
    fn leaf_value(&self, idx: &[usize]) -> LeafValue<T> {
        match self.y {
            Response::Class(c) => {
                let mut counts = [0usize; 2];
                idx.iter().for_each(|&i| counts[c[i]] += 1);
                LeafValue::Label(if counts[1] > counts[0] {
                    DiagnosisLabel::Hc
                } else {
                    DiagnosisLabel::Mci
                })
            }
            Response::Real(v) => {
                let s: f64 = idx.iter().map(|&i| v[i]).sum();
                LeafValue::Value(T::of(s / idx.len() as f64))
            }
        }
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        match self.y {
            Response::Class(c) => idx.iter().all(|&i| c[i] == c[idx[0]]),
            Response::Real(v) => idx.iter().all(|&i| v[i] == v[idx[0]]),
        }
    }

    fn varies(&self, idx: &[usize], f: usize) -> bool {
        let first = self.x[[idx[0], f]];
        idx.iter().any(|&i| self.x[[i, f]] != first)
    }

    fn candidate_features(&mut self, idx: &[usize]) -> Vec<usize> {
        let d = self.x.ncols();
        match (self.cfg.max_features, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < d => {
                let mut order: Vec<usize> = (0..d).collect();
                order.shuffle(rng);
                let mut picked: Vec<usize> = Vec::with_capacity(k);
                for f in order {
                    if picked.len() == k {
                        break;
                    }
                    if self.varies(idx, f) {
                        picked.push(f);
                    }
                }
                picked.sort_unstable();
                picked
            }
            _ => (0..d).filter(|&f| self.varies(idx, f)).collect(),
        }
    }

    /// Returns `(feature, threshold)` of the best split, if any feature varies.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, T)> {
        let features = self.candidate_features(idx);
        let n = idx.len();
        let mut best: Option<(SplitScore, usize, T)> = None;

        for f in features {
            self.sorted.clear();
            self.sorted.extend(idx.iter().map(|&i| (self.x[[i, f]], i)));
            self.sorted
                .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));

            match self.y {
                Response::Class(c) => {
                    let mut total = [0usize; 2];
                    idx.iter().for_each(|&i| total[c[i]] += 1);
                    let mut left = [0usize; 2];
                    for k in 1..n {
                        left[c[self.sorted[k - 1].1]] += 1;
                        let (a, b) = (self.sorted[k - 1].0, self.sorted[k].0);
                        if a < b {
                            let right = [total[0] - left[0], total[1] - left[1]];
                            let score = SplitScore::gini(left, right);
                            if best.as_ref().is_none_or(|(s, _, _)| score.better_than(s)) {
                                best = Some((score, f, midpoint(a, b)));
                            }
                        }
                    }
                }
                Response::Real(v) => {
                    let (tot_s, tot_q) = idx
                        .iter()
                        .fold((0.0, 0.0), |(s, q), &i| (s + v[i], q + v[i] * v[i]));
                    let (mut ls, mut lq) = (0.0f64, 0.0f64);
                    for k in 1..n {
                        let y = v[self.sorted[k - 1].1];
                        ls += y;
                        lq += y * y;
                        let (a, b) = (self.sorted[k - 1].0, self.sorted[k].0);
                        if a < b {
                            let (nl, nr) = (k as f64, (n - k) as f64);
                            let sse_l = (lq - ls * ls / nl).max(0.0);
                            let (rs, rq) = (tot_s - ls, tot_q - lq);
                            let sse_r = (rq - rs * rs / nr).max(0.0);
                            let score = SplitScore::Sse((sse_l + sse_r) / n as f64);
                            if best.as_ref().is_none_or(|(s, _, _)| score.better_than(s)) {
                                best = Some((score, f, midpoint(a, b)));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            value: self.leaf_value(idx),
            n_samples: idx.len(),
        };
        self.nodes.push(leaf);

        let stop = idx.len() < self.cfg.min_samples_split
            || self.cfg.max_depth.is_some_and(|m| depth >= m)
            || self.is_pure(idx);
        if stop {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return id;
        };

        let (mut l, mut r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[[i, feature]] <= threshold);
        debug_assert!(!l.is_empty() && !r.is_empty());
        let left = self.grow(&mut l, depth + 1);
        let right = self.grow(&mut r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Midpoint that still separates `a < b` after rounding.
fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let m = a + (b - a) / T::of(2.0);
    if m < b && m >= a {
        m
    } else {
        a
    }
}

pub(crate) fn grow_nodes<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &Response,
    mut sample_idx: Vec<usize>,
    cfg: &GrowConfig,
    rng: Option<&mut StreamRng>,
) -> Vec<Node<T>> {
    let mut g = Grower {
        x,
        y,
        cfg,
        rng,
        nodes: Vec::new(),
        sorted: Vec::with_capacity(sample_idx.len()),
    };
    g.grow(&mut sample_idx, 0);
    g.nodes
}

impl<T: Scalar> DecisionTree<T> {
    pub(crate) fn from_nodes(params: TreeParams, n_features: usize, nodes: Vec<Node<T>>) -> Self {
        DecisionTree {
            params,
            n_features,
            nodes,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf node `row` falls into.
    pub fn leaf_index(&self, row: ArrayView1<'_, T>) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> &LeafValue<T> {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!(),
        }
    }
}

pub fn train_decision_tree<T: Scalar>(data: &Dataset<T>, params: &TreeParams) -> Result<DecisionTree<T>> {
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let cfg = GrowConfig {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features: None,
    };
    let y = Response::from_targets(data.y());
    let nodes = grow_nodes(data.x(), &y, (0..data.len()).collect(), &cfg, None);
    Ok(DecisionTree::from_nodes(*params, data.n_features(), nodes))
}
