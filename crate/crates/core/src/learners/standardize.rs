use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Per-feature z-scoring fitted on training data; population standard deviation.
///
/// Constant features have `scale == 0` and map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(x: ArrayView2<'_, T>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let m = col.iter().map(|v| v.as_f64()).sum::<f64>() / n;
            let var = col.iter().map(|v| (v.as_f64() - m).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            // Spread at rounding level of the mean counts as constant.
            let constant = sd <= 1e-12 * m.abs().max(1.0);
            mean.push(T::of(m));
            scale.push(if constant { T::zero() } else { T::of(sd) });
        }
        Standardizer { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: ArrayView1<'_, T>) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| {
                if s.is_zero() {
                    0.0
                } else {
                    (v.as_f64() - m.as_f64()) / s.as_f64()
                }
            })
            .collect()
    }

    /// Row-major `f64` copy of the standardized matrix.
    pub fn transform(&self, x: ArrayView2<'_, T>) -> Array2<f64> {
        let mut out = Array2::zeros(x.dim());
        for (i, row) in x.rows().into_iter().enumerate() {
            for (j, z) in self.transform_row(row).into_iter().enumerate() {
                out[[i, j]] = z;
            }
        }
        out
    }
}
