//! Linear models on standardized features: soft-margin SVM, ε-SVR and ridge.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiagnosisLabel;
use crate::scalar::Scalar;

use super::dataset::{Dataset, Targets};
use super::linalg::{solve_cholesky, solve_lu};
use super::params::{RidgeParams, SvmParams, SvrParams};
use super::smo::{DualProblem, DualSolution, Loss};
use super::standardize::Standardizer;

/// `f(x) = w · z(x) + b` where `z` is the stored standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunction<T> {
    pub standardizer: Standardizer<T>,
    /// Weights on standardized features.
    pub weights: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> LinearFunction<T> {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, row: ArrayView1<'_, T>) -> f64 {
        let z = self.standardizer.transform_row(row);
        self.bias.as_f64() + z.iter().zip(&self.weights).map(|(z, w)| z * w.as_f64()).sum::<f64>()
    }

    /// Weights and intercept in the original feature units.
    pub fn coefficients(&self) -> (Vec<T>, T) {
        let mut intercept = self.bias.as_f64();
        let w = self
            .weights
            .iter()
            .zip(self.standardizer.mean.iter().zip(&self.standardizer.scale))
            .map(|(w, (m, s))| {
                if s.is_zero() {
                    return T::zero();
                }
                let raw = w.as_f64() / s.as_f64();
                intercept -= raw * m.as_f64();
                T::of(raw)
            })
            .collect();
        (w, T::of(intercept))
    }
}

/// Convergence record of an SMO fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub iterations: usize,
    pub converged: bool,
    /// Primal objective of the returned `(w, b)` on the standardized training set.
    pub primal_objective: f64,
    #[serde(skip)]
    pub dual_objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm<T> {
    pub params: SvmParams,
    pub seed: u64,
    pub function: LinearFunction<T>,
    pub solver: SolverInfo,
}

impl<T: Scalar> LinearSvm<T> {
    /// Nonnegative decision values predict MCI.
    pub fn predict_row(&self, row: ArrayView1<'_, T>) -> DiagnosisLabel {
        if self.function.decision(row) >= 0.0 {
            DiagnosisLabel::Mci
        } else {
            DiagnosisLabel::Hc
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svr<T> {
    pub params: SvrParams,
    pub seed: u64,
    pub function: LinearFunction<T>,
    pub solver: SolverInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge<T> {
    pub params: RidgeParams,
    pub function: LinearFunction<T>,
}

fn gram(z: &Array2<f64>) -> Vec<f64> {
    let n = z.nrows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = z.row(i).dot(&z.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn combine(z: &Array2<f64>, coef: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; z.ncols()];
    for (row, &c) in z.rows().into_iter().zip(coef) {
        if c != 0.0 {
            w.iter_mut().zip(row).for_each(|(w, v)| *w += c * v);
        }
    }
    w
}

fn finish<T: Scalar>(
    standardizer: Standardizer<T>,
    w: &[f64],
    b: f64,
    sol: DualSolution,
    label: &str,
) -> (LinearFunction<T>, SolverInfo) {
    if !sol.converged {
        log::warn!("{label}: SMO stopped at max_iter={} before reaching tolerance", sol.iterations);
    }
    (
        LinearFunction {
            standardizer,
            weights: w.iter().map(|&v| T::of(v)).collect(),
            bias: T::of(b),
        },
        SolverInfo {
            iterations: sol.iterations,
            converged: sol.converged,
            primal_objective: sol.primal,
            dual_objective_trace: sol.objective_trace,
        },
    )
}

/// Soft-margin linear SVM with an unpenalized bias; MCI is the +1 class.
///
/// Minimizes `½‖w‖² + C Σ max(0, 1 − yᵢ(w·zᵢ + b))` over standardized `z`.
/// The solver is deterministic; `seed` is recorded for provenance.
pub fn train_linear_svm<T: Scalar>(data: &Dataset<T>, params: &SvmParams, seed: u64) -> Result<LinearSvm<T>> {
    let Targets::Labels(labels) = data.y() else {
        return Err(Error::InvalidHyperparameter("linear SVM needs class labels".into()));
    };
    if data.len() < 2 {
        return Err(Error::Empty("SVM needs at least two samples"));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::SingleClass);
    }
    if !(params.c > 0.0) || !(params.tol > 0.0) {
        return Err(Error::InvalidHyperparameter("C and tol must be positive".into()));
    }
    let standardizer = Standardizer::fit(data.x());
    let z = standardizer.transform(data.x());
    let kernel = gram(&z);
    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l == DiagnosisLabel::Mci { 1.0 } else { -1.0 })
        .collect();
    let n = data.len();
    let problem = DualProblem {
        kernel: &kernel,
        n_base: n,
        signs: y.clone(),
        base: (0..n).collect(),
        linear: vec![-1.0; n],
        c: params.c,
        loss: Loss::Hinge(&y),
    };
    let sol = problem.solve(params.tol, params.max_iter);
    let coef: Vec<f64> = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).collect();
    let w = combine(&z, &coef);
    let b = sol.bias;
    let (function, solver) = finish(standardizer, &w, b, sol, "linear SVM");
    Ok(LinearSvm {
        params: *params,
        seed,
        function,
        solver,
    })
}

/// Linear ε-insensitive support vector regression.
///
/// Minimizes `½‖w‖² + C Σ max(0, |yᵢ − (w·zᵢ + b)| − ε)` over standardized `z`.
pub fn train_svr<T: Scalar>(data: &Dataset<T>, params: &SvrParams, seed: u64) -> Result<Svr<T>> {
    let Targets::Values(values) = data.y() else {
        return Err(Error::InvalidHyperparameter("SVR needs real-valued targets".into()));
    };
    if !(params.epsilon >= 0.0) {
        return Err(Error::InvalidHyperparameter(format!("epsilon = {}", params.epsilon)));
    }
    if !(params.c > 0.0) || !(params.tol > 0.0) {
        return Err(Error::InvalidHyperparameter("C and tol must be positive".into()));
    }
    if data.len() < 2 {
        return Err(Error::Empty("SVR needs at least two samples"));
    }
    let n = data.len();
    let y: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let standardizer = Standardizer::fit(data.x());
    let z = standardizer.transform(data.x());
    let kernel = gram(&z);
    let problem = DualProblem {
        kernel: &kernel,
        n_base: n,
        signs: (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect(),
        base: (0..2 * n).map(|t| t % n).collect(),
        linear: (0..2 * n)
            .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
            .collect(),
        c: params.c,
        loss: Loss::EpsInsensitive {
            y: &y,
            eps: params.epsilon,
        },
    };
    let sol = problem.solve(params.tol, params.max_iter);
    let coef: Vec<f64> = (0..n).map(|i| sol.alpha[i] - sol.alpha[i + n]).collect();
    let w = combine(&z, &coef);
    let b = sol.bias;
    let (function, solver) = finish(standardizer, &w, b, sol, "SVR");
    Ok(Svr {
        params: *params,
        seed,
        function,
        solver,
    })
}

/// Closed-form ridge regression on standardized, centered features with an
/// unpenalized intercept: `(ZᵀZ + λI) w = Zᵀ(y − ȳ)`, `b = ȳ`.
///
/// Constant features get weight 0. When there are more features than samples
/// the equivalent `N × N` system `(ZZᵀ + λI) a = y − ȳ`, `w = Zᵀa` is solved.
pub fn train_ridge<T: Scalar>(data: &Dataset<T>, params: &RidgeParams) -> Result<Ridge<T>> {
    let Targets::Values(values) = data.y() else {
        return Err(Error::InvalidHyperparameter("ridge needs real-valued targets".into()));
    };
    if !(params.lambda >= 0.0) {
        return Err(Error::InvalidHyperparameter(format!("lambda = {}", params.lambda)));
    }
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let n = data.len();
    let lambda = params.lambda;
    let standardizer = Standardizer::fit(data.x());
    let z_full = standardizer.transform(data.x());
    let active: Vec<usize> = (0..data.n_features())
        .filter(|&j| !standardizer.scale[j].is_zero())
        .collect();
    let z = z_full.select(ndarray::Axis(1), &active);
    let mean_y = values.iter().map(|v| v.as_f64()).sum::<f64>() / n as f64;
    let yc: Vec<f64> = values.iter().map(|v| v.as_f64() - mean_y).collect();
    let d = active.len();

    let solve = |a: Vec<f64>, b: &[f64]| {
        if lambda > 0.0 {
            solve_cholesky(a.clone(), b).or_else(|_| solve_lu(a, b))
        } else {
            solve_lu(a, b)
        }
    };
    let w_active: Vec<f64> = if d == 0 || yc.iter().all(|&v| v == 0.0) {
        vec![0.0; d]
    } else if d <= n {
        let mut a = vec![0.0; d * d];
        for (p, cp) in z.columns().into_iter().enumerate() {
            for (q, cq) in z.columns().into_iter().enumerate().take(p + 1) {
                let v = cp.dot(&cq);
                a[p * d + q] = v;
                a[q * d + p] = v;
            }
            a[p * d + p] += lambda;
        }
        let rhs: Vec<f64> = z.columns().into_iter().map(|c| c.iter().zip(&yc).map(|(a, b)| a * b).sum()).collect();
        solve(a, &rhs)?
    } else {
        let mut a = gram(&z);
        for i in 0..n {
            a[i * n + i] += lambda;
        }
        let dual = solve(a, &yc)?;
        combine(&z, &dual)
    };

    let mut weights = vec![T::zero(); data.n_features()];
    for (&j, &w) in active.iter().zip(&w_active) {
        weights[j] = T::of(w);
    }
    Ok(Ridge {
        params: *params,
        function: LinearFunction {
            standardizer,
            weights,
            bias: T::of(mean_y),
        },
    })
}
