//! Reference optimum for the linear SVM and SVR primal problems, found by
//! enumerating active sets on tiny instances.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use vamci_core::learners::{solve_lu, train_linear_svm, train_svr, Dataset, SvmParams, SvrParams, Targets};
use vamci_core::model::DiagnosisLabel::{self, Hc, Mci};

use super::{dot, standardize};

/// Minimizes a convex piecewise-linear-plus-constant function of `b` by
/// evaluating every breakpoint.
pub fn best_bias(candidates: impl Iterator<Item = f64>, objective: &dyn Fn(f64) -> f64) -> f64 {
    candidates.map(objective).fold(f64::INFINITY, f64::min)
}

pub fn svm_objective(z: &Array2<f64>, y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    0.5 * dot(w, w)
        + c * z
            .rows()
            .into_iter()
            .zip(y)
            .map(|(r, y)| (1.0 - y * (dot(r.as_slice().unwrap(), w) + b)).max(0.0))
            .sum::<f64>()
}

pub fn svr_objective(z: &Array2<f64>, y: &[f64], w: &[f64], b: f64, c: f64, eps: f64) -> f64 {
    0.5 * dot(w, w)
        + c * z
            .rows()
            .into_iter()
            .zip(y)
            .map(|(r, y)| ((y - dot(r.as_slice().unwrap(), w) - b).abs() - eps).max(0.0))
            .sum::<f64>()
}

/// Enumerates every assignment of samples to "coefficient fixed at a bound"
/// or "on the margin", solves the margin equalities with the balance
/// constraint, and returns the smallest primal objective reached. Every
/// candidate is a feasible primal point, so this is an upper bound that
/// equals the optimum once the optimal active set is enumerated.
///
/// `fixed_values` are the coefficient values a non-margin sample may take
/// and `margin_targets(i)` the decision values a margin sample may be pinned to.
pub fn active_set_oracle(
    z: &Array2<f64>,
    fixed_values: &[f64],
    margin_targets: &dyn Fn(usize) -> Vec<(f64, f64)>,
    signs: &[f64],
    objective: &dyn Fn(&[f64], f64) -> f64,
    breakpoints: &dyn Fn(&[f64]) -> Vec<f64>,
) -> f64 {
    let n = z.nrows();
    let d = z.ncols();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dot(z.row(i).as_slice().unwrap(), z.row(j).as_slice().unwrap())).collect())
        .collect();
    // Per sample: fixed coefficient choices followed by margin choices.
    let choices: Vec<Vec<Result<f64, (f64, f64)>>> = (0..n)
        .map(|i| {
            fixed_values
                .iter()
                .map(|&v| Ok(v))
                .chain(margin_targets(i).into_iter().map(Err))
                .collect()
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut state = vec![0usize; n];
    loop {
        // coef_i multiplies signs[i] * z_i in w.
        let mut fixed = vec![0.0; n];
        let mut margin = Vec::new();
        for i in 0..n {
            match choices[i][state[i]] {
                Ok(v) => fixed[i] = v,
                Err(t) => margin.push((i, t)),
            }
        }
        let m = margin.len();
        let mut a = vec![0.0; (m + 1) * (m + 1)];
        let mut rhs = vec![0.0; m + 1];
        for (r, &(i, (target, _))) in margin.iter().enumerate() {
            for (c, &(j, _)) in margin.iter().enumerate() {
                a[r * (m + 1) + c] = signs[i] * signs[j] * k[i][j];
            }
            a[r * (m + 1) + m] = signs[i];
            rhs[r] = target - (0..n).map(|j| signs[i] * signs[j] * k[i][j] * fixed[j]).sum::<f64>();
        }
        for (c, &(j, _)) in margin.iter().enumerate() {
            a[m * (m + 1) + c] = signs[j];
        }
        rhs[m] = -(0..n).map(|j| signs[j] * fixed[j]).sum::<f64>();
        if let Ok(sol) = solve_lu(a, &rhs) {
            let mut coef = fixed.clone();
            for (r, &(i, _)) in margin.iter().enumerate() {
                coef[i] = sol[r];
            }
            let mut w = vec![0.0; d];
            for i in 0..n {
                for f in 0..d {
                    w[f] += coef[i] * signs[i] * z[[i, f]];
                }
            }
            let mut cands = breakpoints(&w);
            cands.push(sol[m]);
            best = best.min(best_bias(cands.into_iter(), &|b| objective(&w, b)));
        }
        // Next state (odometer).
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            state[i] += 1;
            if state[i] < choices[i].len() {
                break;
            }
            state[i] = 0;
            i += 1;
        }
    }
}

/// `(ours, oracle)` primal objectives of the linear SVM on `count` random
/// 7-point problems.
pub fn svm_cases(rng: &mut impl Rng, count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for case in 0..count {
        let n = 7;
        let d = rng.random_range(1..=3);
        let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        let mut labels: Vec<DiagnosisLabel> = (0..n).map(|_| if rng.random_bool(0.5) { Mci } else { Hc }).collect();
        labels[0] = Mci;
        labels[1] = Hc;
        let c = [0.1, 1.0, 10.0][case % 3];
        let data = Dataset::ungrouped(x.clone(), Targets::Labels(labels.clone())).unwrap();
        let model = train_linear_svm(&data, &SvmParams { c, ..Default::default() }, 0).unwrap();

        let z = standardize(x.view());
        let y: Vec<f64> = labels.iter().map(|&l| if l == Mci { 1.0 } else { -1.0 }).collect();
        let ours = svm_objective(&z, &y, &model.function.weights, model.function.bias, c);
        // Dual coefficient 0 or C; margin samples satisfy y_i f(x_i) = 1, i.e. signed decision 1.
        let oracle = active_set_oracle(
            &z,
            &[0.0, c],
            &|_| vec![(1.0, 0.0)],
            &y,
            &|w, b| svm_objective(&z, &y, w, b, c),
            &|w| (0..n).map(|i| y[i] - dot(z.row(i).as_slice().unwrap(), w)).collect(),
        );
        out.push((ours, oracle));
    }
    out
}

/// `(ours, oracle)` primal objectives of SVR on `count` random 6-point problems.
pub fn svr_cases(rng: &mut impl Rng, count: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for case in 0..count {
        let n = 6;
        let d = rng.random_range(1..=3);
        let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
        let w_true: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| dot(x.row(i).as_slice().unwrap(), &w_true) + 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let c = [0.1, 1.0, 10.0][case % 3];
        let eps = [0.1, 0.5][case % 2];
        let data = Dataset::ungrouped(x.clone(), Targets::Values(y.clone())).unwrap();
        let model = train_svr(&data, &SvrParams { c, epsilon: eps, ..Default::default() }, 0).unwrap();

        let z = standardize(x.view());
        let ours = svr_objective(&z, &y, &model.function.weights, model.function.bias, c, eps);
        // Coefficient beta_i in {-C, 0, C} or on a tube edge f = y - eps / f = y + eps.
        let oracle = active_set_oracle(
            &z,
            &[-c, 0.0, c],
            &|i| vec![(y[i] - eps, 0.0), (y[i] + eps, 0.0)],
            &vec![1.0; n],
            &|w, b| svr_objective(&z, &y, w, b, c, eps),
            &|w| {
                (0..n)
                    .flat_map(|i| {
                        let r = y[i] - dot(z.row(i).as_slice().unwrap(), w);
                        [r - eps, r + eps]
                    })
                    .collect()
            },
        );
        out.push((ours, oracle));
    }
    out
}
