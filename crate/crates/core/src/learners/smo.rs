//! Sequential minimal optimization for box- and equality-constrained dual QPs
//!
//! ```text
//! min_a  ½ aᵀQa + pᵀa   s.t.  sᵀa = 0,  0 <= a_t <= C,   Q_ts = s_t s_s K(b_t, b_s)
//! ```
//!
//! with second-order working-set selection. Classification uses one variable
//! per sample; ε-insensitive regression uses two (upper and lower tube side),
//! both mapped back onto the same base sample through `base`.
//!
//! Stopping is two-staged. Iterations run until the maximal KKT violation is
//! below a threshold (initially `tol`); then the primal objective of the
//! implied `(w, b)` is compared with the dual, and if the relative duality gap
//! still exceeds `tol` the threshold shrinks tenfold and iteration resumes.
//! A KKT threshold alone bounds the gap only by about `n · C · tol`.

const TAU: f64 = 1e-12;
const KKT_FLOOR: f64 = 1e-13;

/// Loss attached to the primal problem, per base sample.
pub(crate) enum Loss<'a> {
    /// `max(0, 1 - y f)` with `y = ±1`.
    Hinge(&'a [f64]),
    /// `max(0, |y - f| - eps)`.
    EpsInsensitive { y: &'a [f64], eps: f64 },
}

impl Loss<'_> {
    fn at(&self, i: usize, f: f64) -> f64 {
        match self {
            Loss::Hinge(y) => (1.0 - y[i] * f).max(0.0),
            Loss::EpsInsensitive { y, eps } => ((y[i] - f).abs() - eps).max(0.0),
        }
    }

    /// Offsets `b` at which sample `i`'s loss has a kink, given `w · z_i = m`.
    fn kinks(&self, i: usize, m: f64, out: &mut Vec<f64>) {
        match self {
            Loss::Hinge(y) => out.push(y[i] - m),
            Loss::EpsInsensitive { y, eps } => {
                out.push(y[i] - m - eps);
                out.push(y[i] - m + eps);
            }
        }
    }
}

pub(crate) struct DualProblem<'a> {
    /// Row-major Gram matrix over base samples.
    pub kernel: &'a [f64],
    pub n_base: usize,
    pub signs: Vec<f64>,
    pub base: Vec<usize>,
    pub linear: Vec<f64>,
    pub c: f64,
    pub loss: Loss<'a>,
}

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    /// Offset of the decision value `Σ a_t s_t K(b_t, x) + bias`, chosen to
    /// minimize the primal objective for the final coefficients.
    pub bias: f64,
    pub primal: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Minimized dual objective after every update, starting from `a = 0`.
    pub objective_trace: Vec<f64>,
}

impl DualProblem<'_> {
    #[inline]
    fn q(&self, t: usize, s: usize) -> f64 {
        self.signs[t] * self.signs[s] * self.kernel[self.base[t] * self.n_base + self.base[s]]
    }

    fn objective(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        0.5 * alpha
            .iter()
            .zip(grad.iter().zip(&self.linear))
            .map(|(a, (g, p))| a * (g + p))
            .sum::<f64>()
    }

    pub fn solve(&self, tol: f64, max_iter: usize) -> DualSolution {
        let l = self.signs.len();
        let c = self.c;
        let y = &self.signs;
        let diag: Vec<f64> = (0..l).map(|t| self.q(t, t)).collect();
        let mut alpha = vec![0.0; l];
        let mut grad = self.linear.clone();
        let mut trace = vec![0.0];
        let upper = |a: f64| a >= c;
        let lower = |a: f64| a <= 0.0;

        let mut iterations = 0;
        let mut converged = false;
        let mut kkt_tol = tol;
        loop {
            // Maximal violating index from I_up.
            let mut gmax = f64::NEG_INFINITY;
            let mut i = usize::MAX;
            for t in 0..l {
                let v = -y[t] * grad[t];
                let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
                if in_up && v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
            // Partner from I_low by second-order gain.
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j = usize::MAX;
            let mut best_gain = f64::INFINITY;
            if i != usize::MAX {
                for t in 0..l {
                    let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
                    if !in_low {
                        continue;
                    }
                    let v = y[t] * grad[t];
                    gmax2 = gmax2.max(v);
                    let diff = gmax + v;
                    if diff > 0.0 {
                        let quad = diag[i] + diag[t] - 2.0 * y[i] * y[t] * self.q(i, t);
                        let gain = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                        if gain <= best_gain {
                            best_gain = gain;
                            j = t;
                        }
                    }
                }
            }
            if i == usize::MAX || j == usize::MAX || gmax + gmax2 < kkt_tol {
                let (primal, _) = self.primal(&alpha, &grad);
                let dual = -trace.last().copied().unwrap_or(0.0);
                if primal - dual <= tol * primal.abs() || kkt_tol <= KKT_FLOOR || j == usize::MAX {
                    converged = true;
                    break;
                }
                kkt_tol = (kkt_tol / 10.0).max(KKT_FLOOR);
                continue;
            }
            if iterations >= max_iter {
                break;
            }

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let qij = self.q(i, j);
            if y[i] != y[j] {
                let quad = (diag[i] + diag[j] + 2.0 * qij).max(TAU);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (diag[i] + diag[j] - 2.0 * qij).max(TAU);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for (t, g) in grad.iter_mut().enumerate() {
                *g += self.q(t, i) * di + self.q(t, j) * dj;
            }
            iterations += 1;
            trace.push(self.objective(&alpha, &grad));
        }

        let (primal, bias) = self.primal(&alpha, &grad);
        DualSolution {
            alpha,
            bias,
            primal,
            iterations,
            converged,
            objective_trace: trace,
        }
    }

    /// Primal objective and its minimizing bias for the `w` implied by `alpha`.
    ///
    /// `w · z_i` is recovered from the gradient as `s_i (G_i - p_i)` and
    /// `‖w‖² = aᵀQa`. The loss is convex piecewise linear in the bias, so its
    /// minimum lies at a kink; the KKT estimate `-rho` is kept unless a kink
    /// is strictly better.
    fn primal(&self, alpha: &[f64], grad: &[f64]) -> (f64, f64) {
        let n = self.n_base;
        let margins: Vec<f64> = (0..n).map(|i| self.signs[i] * (grad[i] - self.linear[i])).collect();
        let norm2: f64 = alpha
            .iter()
            .zip(grad.iter().zip(&self.linear))
            .map(|(a, (g, p))| a * (g - p))
            .sum();
        let value = |b: f64| 0.5 * norm2 + self.c * (0..n).map(|i| self.loss.at(i, margins[i] + b)).sum::<f64>();
        let mut best_b = -self.rho(alpha, grad);
        let mut best = value(best_b);
        let mut kinks = Vec::with_capacity(2 * n);
        (0..n).for_each(|i| self.loss.kinks(i, margins[i], &mut kinks));
        for b in kinks {
            let v = value(b);
            if v < best - 1e-12 * best.abs() {
                best = v;
                best_b = b;
            }
        }
        (best, best_b)
    }

    fn rho(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..alpha.len() {
            let yg = self.signs[t] * grad[t];
            if alpha[t] >= self.c {
                if self.signs[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if self.signs[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        if free > 0 {
            sum_free / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}
