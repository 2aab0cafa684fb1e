//! Brute-force posterior recursion on a fixed grid.
//!
//! Propagates the posterior density of the hidden state by trapezoid
//! quadrature of
//!
//! ```text
//! w_n(s) = f(x_n|s) / f(x_n|x_1..x_{n-1}) * integral p(s|s') w_{n-1}(s') ds'
//! ```
//!
//! and reports the grid posterior means. It uses only the transition and
//! observation densities, none of the closed forms, so it serves as an
//! oracle for every other estimator.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::run::{FilterRun, Method};

/// Grid resolution: `points` nodes spanning `0 ± half_width_sds * sqrt(sigma_tilde^2 + b^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width_sds: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width_sds: 8.0,
            points: 2001,
        }
    }
}

/// Largest posterior mass tolerated in the two boundary cells.
pub const MAX_BOUNDARY_MASS: f64 = 1e-10;

impl GridSpec {
    fn check(&self) -> Result<()> {
        if self.points < 501 || self.points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "grid points must be odd and >= 501, got {}",
                self.points
            )));
        }
        if !self.half_width_sds.is_finite() || self.half_width_sds < 6.0 {
            return Err(Error::InvalidArgument(format!(
                "grid half width must be >= 6 standard deviations, got {}",
                self.half_width_sds
            )));
        }
        Ok(())
    }
}

/// Grid posterior means; `aux` carries the grid posterior variance.
pub fn grid_bayes_oracle(params: &ModelParams, xs: &[f64], grid: GridSpec) -> Result<FilterRun> {
    grid.check()?;
    if xs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let m = grid.points;
    let half = grid.half_width_sds * (params.stationary_variance() + params.b_sq()).sqrt();
    let h = 2.0 * half / (m - 1) as f64;
    let nodes: Vec<f64> = (0..m).map(|i| -half + i as f64 * h).collect();
    let trap = |i: usize| if i == 0 || i == m - 1 { 0.5 * h } else { h };

    // kernel[i * m + j] = p(s_i | s_j) * trapezoid weight of node j
    let (a, b_sq) = (params.a(), params.b_sq());
    let norm = 1.0 / (2.0 * PI * b_sq).sqrt();
    let mut kernel = vec![0.0; m * m];
    for (i, &si) in nodes.iter().enumerate() {
        let row = &mut kernel[i * m..(i + 1) * m];
        for (j, &sj) in nodes.iter().enumerate() {
            let d = si - a * sj;
            row[j] = norm * (-d * d / (2.0 * b_sq)).exp() * trap(j);
        }
    }

    let var0 = params.stationary_variance();
    let mut prior: Vec<f64> = nodes
        .iter()
        .map(|s| (-s * s / (2.0 * var0)).exp() / (2.0 * PI * var0).sqrt())
        .collect();
    let mut post = vec![0.0; m];
    let mut log_lik = vec![0.0; m];
    let (gain, noise_sq) = (params.gain(), params.noise_sq());

    let mut estimates = Vec::with_capacity(xs.len());
    let mut aux = Vec::with_capacity(xs.len());
    for (step, &x) in xs.iter().enumerate() {
        if step > 0 {
            for (i, p) in prior.iter_mut().enumerate() {
                *p = kernel[i * m..(i + 1) * m]
                    .iter()
                    .zip(&post)
                    .map(|(k, w)| k * w)
                    .sum();
            }
        }
        // Likelihood in log space, shifted by its maximum, keeps far-off
        // observations from underflowing to an all-zero posterior.
        let mut max_ll = f64::NEG_INFINITY;
        for (ll, &s) in log_lik.iter_mut().zip(&nodes) {
            let d = x - gain * s;
            *ll = -d * d / (2.0 * noise_sq);
            max_ll = max_ll.max(*ll);
        }
        for i in 0..m {
            post[i] = (log_lik[i] - max_ll).exp() * prior[i];
        }
        let z: f64 = (0..m).map(|i| trap(i) * post[i]).sum();
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::GridTooCoarse {
                step: step + 1,
                mass: f64::NAN,
            });
        }
        post.iter_mut().for_each(|w| *w /= z);
        debug_assert!(((0..m).map(|i| trap(i) * post[i]).sum::<f64>() - 1.0).abs() < 1e-8);

        let boundary = trap(0) * post[0] + trap(m - 1) * post[m - 1];
        if boundary > MAX_BOUNDARY_MASS {
            return Err(Error::GridTooCoarse {
                step: step + 1,
                mass: boundary,
            });
        }
        let mean: f64 = (0..m).map(|i| trap(i) * nodes[i] * post[i]).sum();
        let var: f64 = (0..m)
            .map(|i| trap(i) * (nodes[i] - mean).powi(2) * post[i])
            .sum();
        estimates.push(mean);
        aux.push(var);
    }

    Ok(FilterRun {
        method: Method::GridOracle,
        estimates,
        aux,
    })
}
