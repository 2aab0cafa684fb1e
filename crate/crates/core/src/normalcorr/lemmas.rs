//! Residuals of the algebraic identities linking the psi recurrences, the
//! filter parameters and the coefficients of the batch estimate.
//!
//! Each check evaluates both sides independently and reports the largest
//! [`relative_residual`] over the indices involved.

use serde::Serialize;

use super::psi::psi_table;
use crate::error::{Error, Result};
use crate::model::{derived_constants, param_sequences, ModelParams};

/// `|x - y| / max(|x|, |y|)`, and 0 when both sides are 0.
pub fn relative_residual(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// Residuals for one parameter set and dimension `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub n: usize,
    /// `psi~_n` against `(1 - a^2) prod sigma_i / (B^{2n} a^n)`.
    pub psi_closed_form: f64,
    /// Numerator of the first coefficient against `A b^2 / (B^2 a)`.
    pub numerator_first: f64,
    /// Interior numerators against `(A b^2 / (B^2 a)) psi_{k-1}`.
    pub numerator_interior: f64,
    /// Last numerator against `(A b^2 / (B^2 a)) psi_{n-1}`.
    pub numerator_last: f64,
    /// The same three numerators against `C_{x_k} (1 - a^2) / (B^{2n} a^n)`.
    pub cx_first: f64,
    pub cx_interior: f64,
    pub cx_last: f64,
    /// `C_{x_k}` against its two expansions through `sigma_{k-1}` and `sigma_k`.
    pub cx_alternate: f64,
    /// `psi~_{n+1} = (d0/a + a) psi~_n - psi~_{n-1}`; needs `n >= 3`.
    pub terminal_three_term: Option<f64>,
    /// Gamma recursion against `B^2 kappa_k / sigma_k`.
    pub gamma_kappa: f64,
    /// `B^2 + A^2 b^2 + A^2 a^2 gamma_k = sigma_{k+1}`.
    pub kalman_denominator: f64,
    /// `A b^2 + a^2 A gamma_k = A kappa_{k+1}`.
    pub kalman_numerator: f64,
}

impl LemmaReport {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("psi_closed_form", self.psi_closed_form),
            ("numerator_first", self.numerator_first),
            ("numerator_interior", self.numerator_interior),
            ("numerator_last", self.numerator_last),
            ("cx_first", self.cx_first),
            ("cx_interior", self.cx_interior),
            ("cx_last", self.cx_last),
            ("cx_alternate", self.cx_alternate),
        ];
        if let Some(r) = self.terminal_three_term {
            out.push(("terminal_three_term", r));
        }
        out.extend([
            ("gamma_kappa", self.gamma_kappa),
            ("kalman_denominator", self.kalman_denominator),
            ("kalman_numerator", self.kalman_numerator),
        ]);
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.entries().iter().fold(0.0, |acc, (_, r)| acc.max(*r))
    }
}

fn max_over(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().fold(0.0, f64::max)
}

/// Evaluates every identity for dimension `n >= 2`.
pub fn lemma_checks(params: &ModelParams, n: usize) -> Result<LemmaReport> {
    let table = psi_table(params, n)?;
    let seqs = param_sequences(params, n + 1);
    let (a, b_sq, gain, noise_sq) = (params.a(), params.b_sq(), params.gain(), params.noise_sq());
    let gain_sq = params.gain_sq();
    let d0 = derived_constants(params).d0;
    let (psi, psi_last) = (&table.psi, table.psi_last);
    let (kappa, sigma) = (&seqs.kappa, &seqs.sigma);

    let n_i = n as i32;
    let closed =
        (1.0 - a * a) * sigma[..n].iter().product::<f64>() / (noise_sq.powi(n_i) * a.powi(n_i));
    let psi_closed_form = relative_residual(psi_last, closed);

    // Numerators of the coefficients, divided by A a.
    let aa = gain * a;
    let first = (a * psi[1] - 1.0) / aa;
    let interior: Vec<f64> = (1..n - 1)
        .map(|k| (a * psi[k - 1] - (1.0 + a * a) * psi[k] + a * psi[k + 1]) / aa)
        .collect();
    let last = (a * psi[n - 2] - psi[n - 1] + a * psi_last) / aa;

    let factor = gain * b_sq / (noise_sq * a);
    let numerator_first = relative_residual(first, factor);
    let numerator_interior = max_over(
        interior
            .iter()
            .enumerate()
            .map(|(i, v)| relative_residual(*v, factor * psi[i + 1])),
    );
    let numerator_last = relative_residual(last, factor * psi[n - 1]);

    // C_{x_k} with 1-based k; index k-1 below.
    let cx: Vec<f64> = (0..n)
        .map(|k| {
            let lag = (n - 1 - k) as i32;
            gain * a.powi(lag) * noise_sq.powi(lag) * kappa[k] * sigma[..k].iter().product::<f64>()
        })
        .collect();
    let scale = (1.0 - a * a) / (noise_sq.powi(n_i) * a.powi(n_i));
    let cx_first = relative_residual(first, cx[0] * scale);
    let cx_interior = max_over(
        interior
            .iter()
            .enumerate()
            .map(|(i, v)| relative_residual(*v, cx[i + 1] * scale)),
    );
    let cx_last = relative_residual(last, cx[n - 1] * scale);

    let cx_alternate = max_over((1..n).map(|k| {
        let lag = (n - 1 - k) as i32;
        let lead = a.powi(lag) * noise_sq.powi(lag) / gain;
        let through_prev = lead
            * (noise_sq * a * a + gain_sq * b_sq - noise_sq * noise_sq * a * a / sigma[k - 1])
            * sigma[..k].iter().product::<f64>();
        let through_curr = lead * (1.0 - noise_sq / sigma[k]) * sigma[..=k].iter().product::<f64>();
        relative_residual(cx[k], through_prev).max(relative_residual(cx[k], through_curr))
    }));

    let terminal_three_term = if n >= 3 {
        let prev = psi_table(params, n - 1)?.psi_last;
        let next = psi_table(params, n + 1)?.psi_last;
        Some(relative_residual(next, (d0 / a + a) * psi_last - prev))
    } else {
        None
    };

    // Gamma from its own recursion, started from the stationary prior.
    let var0 = params.stationary_variance();
    let mut gamma = noise_sq * var0 / (gain_sq * var0 + noise_sq);
    let (mut gamma_kappa, mut kalman_denominator, mut kalman_numerator) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..n {
        gamma_kappa = gamma_kappa.max(relative_residual(gamma, noise_sq * kappa[k] / sigma[k]));
        let denom = noise_sq + gain_sq * b_sq + gain_sq * a * a * gamma;
        kalman_denominator = kalman_denominator.max(relative_residual(denom, sigma[k + 1]));
        let numer = gain * b_sq + a * a * gain * gamma;
        kalman_numerator = kalman_numerator.max(relative_residual(numer, gain * kappa[k + 1]));
        let pred = a * a * gamma + b_sq;
        gamma = noise_sq * pred / (gain_sq * pred + noise_sq);
    }

    if ![psi_closed_form, numerator_first, cx_alternate, gamma_kappa]
        .iter()
        .all(|r| r.is_finite())
    {
        return Err(Error::InvalidArgument(format!(
            "identity residuals are not finite at dimension {n}"
        )));
    }

    Ok(LemmaReport {
        n,
        psi_closed_form,
        numerator_first,
        numerator_interior,
        numerator_last,
        cx_first,
        cx_interior,
        cx_last,
        cx_alternate,
        terminal_three_term,
        gamma_kappa,
        kalman_denominator,
        kalman_numerator,
    })
}
