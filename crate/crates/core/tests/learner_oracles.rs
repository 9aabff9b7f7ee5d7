//! Learners checked against independent exhaustive or closed-form references.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vamci_core::learners::{
    train_decision_tree, train_knn, train_linear_svm, train_ridge, Dataset, KnnParams, LeafValue, Node, RidgeParams,
    SvmParams, Targets, TreeParams,
};
use vamci_core::model::DiagnosisLabel::{self, Hc, Mci};

mod support;

use support::{dot, standardize};

// ---------- decision tree ----------

type Score<'a> = &'a dyn Fn(&[usize], &[usize]) -> (i128, i128);

/// Exhaustive best split with exact rational scores. Returns the lowest
/// (feature, threshold) among optimal splits.
fn oracle_split(x: ArrayView2<f64>, score_of: Score, idx: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<((i128, i128), usize, f64)> = None;
    for f in 0..x.ncols() {
        let mut vals: Vec<f64> = idx.iter().map(|&i| x[[i, f]]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[[i, f]] <= thr);
            let s = score_of(&l, &r);
            let better = match best {
                None => true,
                Some(((n, d), _, _)) => s.0 * d > n * s.1,
            };
            if better {
                best = Some((s, f, thr));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

fn check_tree(x: ArrayView2<f64>, nodes: &[Node<f64>], score_of: Score, pure: &dyn Fn(&[usize]) -> bool) {
    fn walk(
        x: ArrayView2<f64>,
        nodes: &[Node<f64>],
        id: usize,
        idx: Vec<usize>,
        score_of: Score,
        pure: &dyn Fn(&[usize]) -> bool,
    ) {
        match &nodes[id] {
            Node::Leaf { n_samples, .. } => {
                assert_eq!(*n_samples, idx.len());
                let splittable = (0..x.ncols()).any(|f| idx.iter().any(|&i| x[[i, f]] != x[[idx[0], f]]));
                assert!(pure(&idx) || !splittable, "leaf {id} could still be split");
            }
            Node::Split { feature, threshold, left, right } => {
                let expect = oracle_split(x, score_of, &idx).expect("split node must have a split");
                assert_eq!((*feature, *threshold), expect, "node {id}");
                let (l, r) = idx.iter().partition(|&&i| x[[i, *feature]] <= *threshold);
                walk(x, nodes, *left, l, score_of, pure);
                walk(x, nodes, *right, r, score_of, pure);
            }
        }
    }
    walk(x, nodes, 0, (0..x.nrows()).collect(), score_of, pure);
}

#[test]
fn tree_matches_exhaustive_gini_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.random_range(2..=10);
        let d = rng.random_range(1..=3);
        // Small integer grid makes duplicate values and tied splits common.
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(0..4) as f64);
        let y: Vec<DiagnosisLabel> = (0..n).map(|_| if rng.random_bool(0.5) { Mci } else { Hc }).collect();
        let data = Dataset::ungrouped(x.clone(), Targets::Labels(y.clone())).unwrap();
        let tree = train_decision_tree(&data, &TreeParams::default()).unwrap();

        let score_of = |l: &[usize], r: &[usize]| {
            let sq = |s: &[usize]| {
                let m = s.iter().filter(|&&i| y[i] == Mci).count() as i128;
                let h = s.len() as i128 - m;
                m * m + h * h
            };
            let (nl, nr) = (l.len() as i128, r.len() as i128);
            (sq(l) * nr + sq(r) * nl, nl * nr)
        };
        let pure = |s: &[usize]| s.iter().all(|&i| y[i] == y[s[0]]);
        check_tree(x.view(), tree.nodes(), &score_of, &pure);

        // Leaf labels are the majority, ties to MCI.
        for row in 0..n {
            let leaf = tree.leaf_index(x.row(row));
            let members: Vec<usize> = (0..n).filter(|&i| tree.leaf_index(x.row(i)) == leaf).collect();
            let mci = members.iter().filter(|&&i| y[i] == Mci).count();
            let want = if members.len() - mci > mci { Hc } else { Mci };
            assert_eq!(tree.predict_row(x.row(row)), &LeafValue::Label(want));
        }
    }
}

#[test]
fn regression_tree_matches_exhaustive_variance_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let n = rng.random_range(2..=10);
        let d = rng.random_range(1..=3);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(0..4) as f64);
        let y: Vec<i128> = (0..n).map(|_| rng.random_range(0..6)).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let data = Dataset::ungrouped(x.clone(), Targets::Values(yf)).unwrap();
        let tree = train_decision_tree(&data, &TreeParams::default()).unwrap();
        // Minimizing SSE is maximizing S_l²/n_l + S_r²/n_r.
        let score_of = |l: &[usize], r: &[usize]| {
            let s = |idx: &[usize]| idx.iter().map(|&i| y[i]).sum::<i128>();
            let (nl, nr) = (l.len() as i128, r.len() as i128);
            (s(l) * s(l) * nr + s(r) * s(r) * nl, nl * nr)
        };
        let pure = |s: &[usize]| s.iter().all(|&i| y[i] == y[s[0]]);
        check_tree(x.view(), tree.nodes(), &score_of, &pure);
    }
}

#[test]
fn knn_k1_fits_distinct_training_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = Array2::from_shape_fn((40, 3), |_| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<_> = (0..40).map(|i| if i % 3 == 0 { Mci } else { Hc }).collect();
    let data = Dataset::ungrouped(x.clone(), Targets::Labels(y.clone())).unwrap();
    let knn = train_knn(&data, &KnnParams { k: 1 }).unwrap();
    for (i, row) in x.rows().into_iter().enumerate() {
        assert_eq!(knn.predict_row(row), y[i]);
    }
}
// ---------- linear models ----------

#[test]
fn linear_svm_reaches_convex_optimum() {
    let cases = support::convex::svm_cases(&mut ChaCha8Rng::seed_from_u64(21), 20);
    for (case, (ours, oracle)) in cases.into_iter().enumerate() {
        assert!((ours - oracle).abs() <= 1e-4 * oracle.abs(), "case {case}: ours {ours} oracle {oracle}");
    }
}

#[test]
fn svr_reaches_convex_optimum() {
    let cases = support::convex::svr_cases(&mut ChaCha8Rng::seed_from_u64(22), 20);
    for (case, (ours, oracle)) in cases.into_iter().enumerate() {
        assert!(
            (ours - oracle).abs() <= 1e-4 * oracle.abs().max(1e-12),
            "case {case}: ours {ours} oracle {oracle}"
        );
    }
}

#[test]
fn ridge_gradient_vanishes_at_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for &(n, d) in &[(12usize, 3usize), (5, 9)] {
        let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let lambda = 0.3;
        let data = Dataset::ungrouped(x.clone(), Targets::Values(y.clone())).unwrap();
        let model = train_ridge(&data, &RidgeParams { lambda }).unwrap();
        let z = standardize(x.view());
        let objective = |w: &[f64], b: f64| {
            z.rows()
                .into_iter()
                .zip(&y)
                .map(|(r, y)| (y - dot(r.as_slice().unwrap(), w) - b).powi(2))
                .sum::<f64>()
                + lambda * dot(w, w)
        };
        let w = &model.function.weights;
        let b = model.function.bias;
        let h = 1e-6;
        for j in 0..=d {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            let (mut bp, mut bm) = (b, b);
            if j < d {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            let grad = (objective(&wp, bp) - objective(&wm, bm)) / (2.0 * h);
            assert!(grad.abs() < 1e-5, "n={n} d={d} coordinate {j}: {grad}");
        }
    }
}

#[test]
fn ridge_without_penalty_recovers_exact_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let x = Array2::from_shape_fn((20, 4), |_| rng.sample::<f64, _>(StandardNormal) * 3.0 + 1.0);
    let w_true = [1.5, -2.0, 0.25, 4.0];
    let y: Vec<f64> = (0..20).map(|i| dot(x.row(i).as_slice().unwrap(), &w_true) - 7.0).collect();
    let data = Dataset::ungrouped(x, Targets::Values(y)).unwrap();
    let (w, b) = train_ridge(&data, &RidgeParams { lambda: 0.0 }).unwrap().function.coefficients();
    for (got, want) in w.iter().zip(w_true) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
    assert!((b + 7.0).abs() < 1e-8);
}

#[test]
fn svm_objective_trace_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..10 {
        let x = Array2::from_shape_fn((40, 4), |_| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<_> = (0..40).map(|_| if rng.random_bool(0.5) { Mci } else { Hc }).collect();
        let data = Dataset::ungrouped(x, Targets::Labels(y)).unwrap();
        let m = train_linear_svm(&data, &SvmParams { c: 10.0, ..Default::default() }, 0).unwrap();
        let t = &m.solver.dual_objective_trace;
        assert!(t.len() > 1);
        for w in t.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }
}
