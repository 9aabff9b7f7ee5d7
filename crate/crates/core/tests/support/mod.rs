//! Shared reference implementations for tests.

pub mod convex;

use ndarray::{Array2, ArrayView2};

/// Column z-scores with population standard deviation; constant columns become 0.
pub fn standardize(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows() as f64;
    let mut z = x.to_owned();
    for mut col in z.columns_mut() {
        let mean = col.sum() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        col.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 });
    }
    z
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}
