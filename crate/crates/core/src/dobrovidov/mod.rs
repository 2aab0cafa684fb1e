//! The optimal filtering equation for the Gaussian observation density.
//!
//! For `f(x|s) = N(As, B^2)` the conditional mean of the hidden state is
//! expressed purely through the one-step predictive density of the
//! observations:
//!
//! ```text
//! E(S_n | x_1..x_n) = (B^2 / A) * d/dx_n ln f(x_n | x_1..x_{n-1}) + x_n / A
//! ```
//!
//! The predictive density is `N(A L_{n-1}, sigma_n)` with the accumulator
//! `L_n = (A a / sigma_n) (x_n kappa_n + L_{n-1} B^2 / A)`, `L_0 = 0`.
//! The estimator is provided in three algebraically equal forms: the
//! score form above, the explicit weighted sum, and the one-step recursion.

mod grid;

pub use grid::{grid_bayes_oracle, GridSpec};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{param_sequences, ModelParams, ParamSequences};
use crate::run::{FilterRun, Method};

/// Mean and variance of `f(x_k | x_1..x_{k-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveParams {
    /// `A L_{k-1}`.
    pub mean: f64,
    /// `sigma_k`.
    pub variance: f64,
    /// The accumulator `L_{k-1}` (predicted state mean).
    pub ell: f64,
}

/// Predictive parameters for every position of `xs`.
///
/// Position 1 has no past; it gets the stationary marginal `N(0, sigma_1)`.
pub fn predictive_sequence(params: &ModelParams, xs: &[f64]) -> Result<Vec<PredictiveParams>> {
    if xs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let seqs = param_sequences(params, xs.len());
    Ok(predictive_from(params, &seqs, xs))
}

fn predictive_from(
    params: &ModelParams,
    seqs: &ParamSequences,
    xs: &[f64],
) -> Vec<PredictiveParams> {
    let (a, gain, noise_sq) = (params.a(), params.gain(), params.noise_sq());
    let mut ell = 0.0;
    let mut out = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let sigma = seqs.sigma[k];
        out.push(PredictiveParams {
            mean: gain * ell,
            variance: sigma,
            ell,
        });
        ell = gain * a / sigma * (x * seqs.kappa[k] + ell * noise_sq / gain);
    }
    out
}

fn check_step(xs: &[f64], k: usize) -> Result<()> {
    if k == 0 || k > xs.len() {
        return Err(Error::StepOutOfRange {
            step: k,
            len: xs.len(),
        });
    }
    Ok(())
}

fn log_normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * PI * variance).ln() - d * d / (2.0 * variance)
}

/// `ln f(x_k | x_1..x_{k-1})` at the observed `x_k`; `k` is 1-based.
pub fn log_predictive_density(params: &ModelParams, xs: &[f64], k: usize) -> Result<f64> {
    check_step(xs, k)?;
    let pred = predictive_sequence(params, &xs[..k])?;
    let p = pred[k - 1];
    Ok(log_normal_pdf(xs[k - 1], p.mean, p.variance))
}

/// `sum_k ln f(x_k | x_1..x_{k-1})`.
pub fn log_likelihood(params: &ModelParams, xs: &[f64]) -> Result<f64> {
    let pred = predictive_sequence(params, xs)?;
    Ok(pred
        .iter()
        .zip(xs)
        .map(|(p, &x)| log_normal_pdf(x, p.mean, p.variance))
        .sum())
}

/// Logarithmic derivative `f'/f` of the predictive density in `x_k`, at the
/// observed `x_k`: `(A L_{k-1} - x_k) / sigma_k`.
pub fn score_ratio(params: &ModelParams, xs: &[f64], k: usize) -> Result<f64> {
    check_step(xs, k)?;
    let pred = predictive_sequence(params, &xs[..k])?;
    let p = pred[k - 1];
    Ok((p.mean - xs[k - 1]) / p.variance)
}

/// Score form: `(B^2 / A) f'/f + x_k / A` at every step. `aux` is `sigma_k`.
pub fn dobrovidov_score(params: &ModelParams, xs: &[f64]) -> Result<FilterRun> {
    let pred = predictive_sequence(params, xs)?;
    let (gain, noise_sq) = (params.gain(), params.noise_sq());
    let estimates = pred
        .iter()
        .zip(xs)
        .map(|(p, &x)| noise_sq / gain * ((p.mean - x) / p.variance) + x / gain)
        .collect();
    Ok(FilterRun {
        method: Method::DobrovidovScore,
        estimates,
        aux: pred.iter().map(|p| p.variance).collect(),
    })
}

/// Recursive form:
/// `E_{n+1} = (A kappa_{n+1} / sigma_{n+1}) x_{n+1} + (B^2 a / sigma_{n+1}) E_n`,
/// starting from `E_1 = A kappa_1 x_1 / sigma_1`. `aux` is `sigma_k`.
pub fn dobrovidov_recursive(params: &ModelParams, xs: &[f64]) -> Result<FilterRun> {
    if xs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let seqs = param_sequences(params, xs.len());
    let (a, gain, noise_sq) = (params.a(), params.gain(), params.noise_sq());
    let mut estimates = Vec::with_capacity(xs.len());
    let mut prev = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let sigma = seqs.sigma[k];
        prev = gain * x / sigma * seqs.kappa[k] + noise_sq * a / sigma * prev;
        estimates.push(prev);
    }
    Ok(FilterRun {
        method: Method::DobrovidovRecursive,
        estimates,
        aux: seqs.sigma,
    })
}

/// Coefficients of `x_1..x_n` in the explicit weighted-sum form of
/// `E(S_n | x_1..x_n)`:
///
/// ```text
/// w_i = A a^{n-i} B^{2(n-i)} kappa_i / (sigma_i sigma_{i+1} ... sigma_n)
///     = (A kappa_i / sigma_i) * prod_{j=i+1..n} (a B^2 / sigma_j)
/// ```
///
/// Evaluated as a running product of the ratios `a B^2 / sigma_j`, each of
/// magnitude below `|a|`, so nothing overflows for long sequences.
/// `seqs` must cover at least `n` steps.
pub fn dobrovidov_weights(params: &ModelParams, seqs: &ParamSequences, n: usize) -> Vec<f64> {
    assert!(
        n <= seqs.len(),
        "sequences cover {} steps, need {n}",
        seqs.len()
    );
    let (a, gain, noise_sq) = (params.a(), params.gain(), params.noise_sq());
    let mut weights = vec![0.0; n];
    let mut tail = 1.0;
    for i in (0..n).rev() {
        weights[i] = gain * seqs.kappa[i] / seqs.sigma[i] * tail;
        tail *= a * noise_sq / seqs.sigma[i];
    }
    weights
}

/// Direct form: every estimate is the explicit linear combination of the
/// observations so far. `O(n^2)` overall. `aux` is `sigma_k`.
pub fn dobrovidov_direct(params: &ModelParams, xs: &[f64]) -> Result<FilterRun> {
    if xs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let seqs = param_sequences(params, xs.len());
    let estimates = (1..=xs.len())
        .map(|n| {
            dobrovidov_weights(params, &seqs, n)
                .iter()
                .zip(xs)
                .map(|(w, x)| w * x)
                .sum()
        })
        .collect();
    Ok(FilterRun {
        method: Method::DobrovidovDirect,
        estimates,
        aux: seqs.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_ref() -> ModelParams {
        ModelParams::reference()
    }

    #[test]
    fn predictive_examples() {
        let pred = predictive_sequence(&p_ref(), &[1.0, 0.3]).unwrap();
        assert_eq!(pred[0].mean, 0.0);
        assert!((pred[0].variance - 2.0).abs() < 1e-15);
        assert!((pred[1].mean - 0.25).abs() < 1e-15);
        assert!((pred[1].variance - 1.875).abs() < 1e-15);

        let pred = predictive_sequence(&p_ref(), &[0.0; 6]).unwrap();
        assert!(pred.iter().all(|p| p.mean == 0.0));
        assert!(matches!(
            predictive_sequence(&p_ref(), &[]),
            Err(Error::EmptyObservations)
        ));
    }

    #[test]
    fn log_density_examples() {
        let v = log_predictive_density(&p_ref(), &[1.0, 0.0], 2).unwrap();
        // -0.5 ln(2 pi 1.875) - 0.25^2 / (2 * 1.875)
        assert!((v - (-1.2499095295825264)).abs() < 1e-14);

        let at_mean = log_predictive_density(&p_ref(), &[1.0, 0.25], 2).unwrap();
        assert!((at_mean + 0.5 * (2.0 * PI * 1.875).ln()).abs() < 1e-15);

        assert!(matches!(
            log_predictive_density(&p_ref(), &[1.0], 2),
            Err(Error::StepOutOfRange { step: 2, len: 1 })
        ));
        assert!(matches!(
            log_predictive_density(&p_ref(), &[1.0], 0),
            Err(Error::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn predictive_density_integrates_to_one() {
        let xs = [0.4, -1.2, 2.0, 0.1];
        let pred = predictive_sequence(&p_ref(), &xs).unwrap();
        for (k, p) in pred.iter().enumerate() {
            let sd = p.variance.sqrt();
            let (lo, hi) = (p.mean - 10.0 * sd, p.mean + 10.0 * sd);
            let m = 10_000;
            let h = (hi - lo) / m as f64;
            let mut integral = 0.0;
            for i in 0..=m {
                let mut ys = xs[..=k].to_vec();
                ys[k] = lo + i as f64 * h;
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                integral += w * log_predictive_density(&p_ref(), &ys, k + 1).unwrap().exp();
            }
            assert!((integral * h - 1.0).abs() < 1e-8, "step {}", k + 1);
        }
    }

    #[test]
    fn score_examples() {
        let s = score_ratio(&p_ref(), &[1.0, 0.0], 2).unwrap();
        assert!((s - 0.25 / 1.875).abs() < 1e-15);
        assert!(score_ratio(&p_ref(), &[1.0, 0.25], 2).unwrap().abs() < 1e-15);

        let xs = [0.7, -0.2, 1.1];
        let h = 1e-5;
        let mut up = xs;
        let mut down = xs;
        up[2] += h;
        down[2] -= h;
        let fd = (log_predictive_density(&p_ref(), &up, 3).unwrap()
            - log_predictive_density(&p_ref(), &down, 3).unwrap())
            / (2.0 * h);
        let analytic = score_ratio(&p_ref(), &xs, 3).unwrap();
        assert!(((fd - analytic) / analytic).abs() < 1e-6);
    }

    #[test]
    fn recursive_examples() {
        let run = dobrovidov_recursive(&p_ref(), &[1.0, 0.5]).unwrap();
        assert!((run.estimates[0] - 0.5).abs() < 1e-15);
        assert!((run.estimates[1] - 0.36666666666666664).abs() < 1e-15);
        assert_eq!(run.aux, vec![2.0, 1.875]);

        let zeros = dobrovidov_recursive(&p_ref(), &[0.0; 5]).unwrap();
        assert!(zeros.estimates.iter().all(|&e| e == 0.0));

        let p = ModelParams::new(0.3, 1.2, -2.0, 0.7).unwrap();
        let single = dobrovidov_recursive(&p, &[1.7]).unwrap();
        let k1 = p.stationary_variance();
        let s1 = p.noise_sq() + p.gain_sq() * k1;
        assert!((single.estimates[0] - p.gain() * k1 * 1.7 / s1).abs() < 1e-15);
    }

    #[test]
    fn direct_examples() {
        let seqs = param_sequences(&p_ref(), 2);
        let w = dobrovidov_weights(&p_ref(), &seqs, 2);
        assert!((w[0] - 0.13333333333333333).abs() < 1e-15);
        assert!((w[1] - 0.4666666666666667).abs() < 1e-15);
        let run = dobrovidov_direct(&p_ref(), &[1.0, 0.5]).unwrap();
        assert!((run.estimates[1] - 0.36666666666666664).abs() < 1e-15);
    }

    #[test]
    fn score_form_closure_matches_recursion() {
        let p = ModelParams::new(-0.7, 0.5, 1.4, 0.6).unwrap();
        let xs: Vec<f64> = (0..40).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let rec = dobrovidov_recursive(&p, &xs).unwrap();
        for k in 1..=xs.len() {
            let s = score_ratio(&p, &xs, k).unwrap();
            let closed = p.noise_sq() / p.gain() * s + xs[k - 1] / p.gain();
            let e = rec.estimates[k - 1];
            assert!((closed - e).abs() <= 1e-12 * e.abs().max(xs[k - 1].abs() / p.gain().abs()));
        }
    }

    #[test]
    fn log_likelihood_sums_steps() {
        let xs = [0.1, 0.9, -0.4];
        let total = log_likelihood(&p_ref(), &xs).unwrap();
        let sum: f64 = (1..=3)
            .map(|k| log_predictive_density(&p_ref(), &xs, k).unwrap())
            .sum();
        assert!((total - sum).abs() < 1e-14);
    }
}
