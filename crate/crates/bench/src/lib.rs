//! Shared fixtures for the benchmarks.

use lgfilter::normalcorr::build_covariances;
use lgfilter::{dense_invert, simulate, ModelParams};

/// Reference model `a = 0.5, b^2 = 0.75, A = B = 1` and a trajectory of length `n`.
pub fn fixture(n: usize) -> (ModelParams, Vec<f64>) {
    let p = ModelParams::reference();
    let xs = simulate(&p, n, 17).expect("n >= 1").x;
    (p, xs)
}

/// Every prefix estimate through a dense Gauss-Jordan inverse of `D_xx`.
/// `O(n^4)` overall; the baseline the structured path is measured against.
pub fn dense_all_prefix(p: &ModelParams, xs: &[f64]) -> Vec<f64> {
    (1..=xs.len())
        .map(|m| {
            let cov = build_covariances(p, m).expect("m >= 1");
            let inv = dense_invert(&cov.d_xx)
                .expect("D_xx is positive definite")
                .inverse;
            (0..m)
                .map(|j| (0..m).map(|i| cov.d_sx[i] * inv[(i, j)]).sum::<f64>() * xs[j])
                .sum()
        })
        .collect()
}
