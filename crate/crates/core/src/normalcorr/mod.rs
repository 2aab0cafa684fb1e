//! Batch estimator from the normal-correlation formula
//! `E(S_n | x) = D_sx D_xx^{-1} x`, with the observation covariance inverted
//! in closed form.
//!
//! `D_xx` has entries `c1 a^{|i-j|} + B^2 [i = j]`. Its `B = 0` part has a
//! tridiagonal inverse `T`, and
//!
//! ```text
//! D_xx^{-1} = T - B^2 T (I + B^2 T)^{-1} T
//! ```
//!
//! where `(I + B^2 T)^{-1}` is again explicit through the psi recurrences.
//! Multiplying out gives the coefficient of `x_k` in the estimate:
//!
//! ```text
//! k = 1      : (a psi_1 - 1)                                  / (A a psi~_n)
//! 1 < k < n  : (a psi_{k-2} - (1 + a^2) psi_{k-1} + a psi_k)  / (A a psi~_n)
//! k = n      : (a psi_{n-2} - psi_{n-1} + a psi~_n)           / (A a psi~_n)
//! ```
//!
//! All numerators reduce to `(A b^2 / (B^2 a)) psi_{k-1}`, so every
//! coefficient has the sign of `a^{n-k}` times `A`.

mod lemmas;
mod psi;

pub use lemmas::{lemma_checks, relative_residual, LemmaReport};
pub use psi::{psi_table, scaled_psi, PsiTable, ScaledPsi, PSI_LIMIT};

use crate::dobrovidov::dobrovidov_weights;
use crate::error::{Error, Result};
use crate::model::{derived_constants, param_sequences, ModelParams};
use crate::oracle::DenseMatrix;
use crate::run::{FilterRun, Method};

/// Covariance blocks of `(S_n, X_1..X_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredCovariance {
    pub n: usize,
    pub c1: f64,
    pub a: f64,
    pub noise_sq: f64,
    /// `cov(X_i, X_j) = c1 a^{|i-j|} + B^2 [i = j]`.
    pub d_xx: DenseMatrix,
    /// `cov(S_n, X_j) = (c1 / A) a^{n-j}`.
    pub d_sx: Vec<f64>,
}

impl StructuredCovariance {
    /// `D_xx` with the observation-noise diagonal removed.
    pub fn d_xx_noiseless(&self) -> DenseMatrix {
        let mut m = self.d_xx.clone();
        for i in 0..self.n {
            m[(i, i)] -= self.noise_sq;
        }
        m
    }
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidArgument(format!(
            "dimension must be >= {min}, got {n}"
        )));
    }
    Ok(())
}

pub fn build_covariances(params: &ModelParams, n: usize) -> Result<StructuredCovariance> {
    check_n(n, 1)?;
    let c1 = derived_constants(params).c1;
    let (a, noise_sq) = (params.a(), params.noise_sq());
    let d_xx = DenseMatrix::from_fn(n, n, |i, j| {
        let off = c1 * a.powi(i.abs_diff(j) as i32);
        if i == j {
            off + noise_sq
        } else {
            off
        }
    });
    let d_sx = (0..n)
        .map(|j| c1 / params.gain() * a.powi((n - 1 - j) as i32))
        .collect();
    Ok(StructuredCovariance {
        n,
        c1,
        a,
        noise_sq,
        d_xx,
        d_sx,
    })
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    fn to_dense(&self) -> DenseMatrix {
        let n = self.diag.len();
        DenseMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// `self * m * self`, exploiting the band structure.
    fn sandwich(&self, m: &DenseMatrix) -> DenseMatrix {
        let n = self.diag.len();
        let band = |j: usize| j.saturating_sub(1)..(j + 2).min(n);
        let right = DenseMatrix::from_fn(n, n, |i, j| {
            band(j).map(|l| m[(i, l)] * self.get(l, j)).sum()
        });
        DenseMatrix::from_fn(n, n, |i, j| {
            band(i).map(|k| self.get(i, k) * right[(k, j)]).sum()
        })
    }
}

fn toeplitz_b0_inverse(params: &ModelParams, n: usize) -> Tridiagonal {
    let c1 = derived_constants(params).c1;
    let a = params.a();
    let scale = 1.0 / (c1 * (1.0 - a * a));
    if n == 1 {
        return Tridiagonal {
            diag: vec![1.0 / c1],
            off: Vec::new(),
        };
    }
    let mut diag = vec![scale * (1.0 + a * a); n];
    diag[0] = scale;
    diag[n - 1] = scale;
    Tridiagonal {
        diag,
        off: vec![-scale * a; n - 1],
    }
}

/// Inverse of the noiseless covariance `c1 a^{|i-j|}`:
/// `(1 / (c1 (1 - a^2))) * tridiag(-a; 1, 1 + a^2, .., 1 + a^2, 1; -a)`.
pub fn invert_toeplitz_b0(params: &ModelParams, n: usize) -> Result<DenseMatrix> {
    check_n(n, 1)?;
    Ok(toeplitz_b0_inverse(params, n).to_dense())
}

/// How the psi values are represented when forming inverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiMode {
    /// Plain table; fails with [`Error::PsiOverflow`] for long sequences.
    #[default]
    Direct,
    /// Log-magnitude table; valid for any dimension.
    Scaled,
}

/// `(I + B^2 T)^{-1}` with entries
/// `((d0 - 1) / (a psi~_n)) psi_{min(i,j)-1} psi_{n-max(i,j)}` (1-based `i`, `j`).
pub fn invert_shifted_tridiagonal(params: &ModelParams, n: usize) -> Result<DenseMatrix> {
    invert_shifted_tridiagonal_with(params, n, PsiMode::Direct)
}

pub fn invert_shifted_tridiagonal_with(
    params: &ModelParams,
    n: usize,
    mode: PsiMode,
) -> Result<DenseMatrix> {
    let a = params.a();
    let d0_minus_one = derived_constants(params).d0_minus_one;
    // 0-based (i, j) with i <= j maps to psi_i * psi_{n-1-j}.
    match mode {
        PsiMode::Direct => {
            let t = psi_table(params, n)?;
            let scale = d0_minus_one / (a * t.psi_last);
            Ok(DenseMatrix::from_fn(n, n, |i, j| {
                let (lo, hi) = (i.min(j), i.max(j));
                scale * t.psi[lo] * t.psi[n - 1 - hi]
            }))
        }
        PsiMode::Scaled => {
            let t = scaled_psi(params, n)?;
            let scale = d0_minus_one / a;
            Ok(DenseMatrix::from_fn(n, n, |i, j| {
                let (lo, hi) = (i.min(j), i.max(j));
                scale * t.product_over_last(lo, n - 1 - hi)
            }))
        }
    }
}

/// Which algebraic form combines `T = (D_xx|_{B=0})^{-1}` and
/// `M^{-1} = (I + B^2 T)^{-1}` into `D_xx^{-1}`.
///
/// Both forms are exact. `Sandwich` is `T - B^2 T M^{-1} T`; it subtracts
/// two terms of size `|T|` and loses about `log10(B^2 |T|)` digits when
/// `B^2 |T|` is large. `Complement` is `(I - M^{-1}) / B^2`; it loses the
/// same number of digits in the opposite regime, where `M^{-1}` is close to
/// the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Assembly {
    /// `Sandwich` when `B^2 max|T_ij| <= 1`, otherwise `Complement`.
    #[default]
    Auto,
    Sandwich,
    Complement,
}

/// Structured `D_xx^{-1}`.
///
/// `n = 1` gives the scalar `1 / (c1 + B^2)`; `a = 0` gives the diagonal
/// `I / (c1 + B^2)` directly since the psi recurrences divide by `a`.
pub fn invert_cov(params: &ModelParams, n: usize) -> Result<DenseMatrix> {
    invert_cov_with(params, n, PsiMode::Direct)
}

pub fn invert_cov_with(params: &ModelParams, n: usize, mode: PsiMode) -> Result<DenseMatrix> {
    invert_cov_assembled(params, n, mode, Assembly::Auto)
}

pub fn invert_cov_assembled(
    params: &ModelParams,
    n: usize,
    mode: PsiMode,
    assembly: Assembly,
) -> Result<DenseMatrix> {
    check_n(n, 1)?;
    let c1 = derived_constants(params).c1;
    let noise_sq = params.noise_sq();
    if n == 1 || params.a() == 0.0 {
        return Ok(DenseMatrix::identity(n).scale(1.0 / (c1 + noise_sq)));
    }
    let t = toeplitz_b0_inverse(params, n);
    let shifted = invert_shifted_tridiagonal_with(params, n, mode)?;
    let stiffness = noise_sq * t.diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let complement = match assembly {
        Assembly::Auto => stiffness > 1.0,
        Assembly::Sandwich => false,
        Assembly::Complement => true,
    };
    if complement {
        return Ok(DenseMatrix::from_fn(n, n, |i, j| {
            ((i == j) as u8 as f64 - shifted[(i, j)]) / noise_sq
        }));
    }
    let correction = t.sandwich(&shifted);
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        t.get(i, j) - noise_sq * correction[(i, j)]
    }))
}

/// Coefficient evaluation route for [`coefficient_vector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientPath {
    /// Product of ratios `a B^2 / sigma_j`; never overflows.
    #[default]
    Stable,
    /// Psi-recurrence numerators; falls back to `Stable` on overflow or `a = 0`.
    Psi,
}

fn single_coefficient(params: &ModelParams) -> f64 {
    let k1 = params.stationary_variance();
    params.gain() * k1 / (params.noise_sq() + params.gain_sq() * k1)
}

/// Coefficients of `x_1..x_n` computed from the psi recurrences.
pub fn coefficient_vector_psi(params: &ModelParams, n: usize) -> Result<Vec<f64>> {
    check_n(n, 1)?;
    if n == 1 {
        return Ok(vec![single_coefficient(params)]);
    }
    let t = psi_table(params, n)?;
    let a = params.a();
    let denom = params.gain() * a * t.psi_last;
    let psi = &t.psi;
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push((a * psi[1] - 1.0) / denom);
    for k in 1..n - 1 {
        coeffs.push((a * psi[k - 1] - (1.0 + a * a) * psi[k] + a * psi[k + 1]) / denom);
    }
    coeffs.push((a * psi[n - 2] - psi[n - 1] + a * t.psi_last) / denom);
    Ok(coeffs)
}

/// Coefficients of `x_1..x_n`; `E(S_n | x) = coeffs . x`.
pub fn coefficient_vector(
    params: &ModelParams,
    n: usize,
    path: CoefficientPath,
) -> Result<Vec<f64>> {
    check_n(n, 1)?;
    if path == CoefficientPath::Psi {
        match coefficient_vector_psi(params, n) {
            Ok(c) => return Ok(c),
            Err(Error::PsiOverflow { .. } | Error::UnsupportedZeroA) => {}
            Err(e) => return Err(e),
        }
    }
    let seqs = param_sequences(params, n);
    Ok(dobrovidov_weights(params, &seqs, n))
}

/// `D_sx D_xx^{-1}` using the structured inverse; `O(n^2)`.
pub fn coefficient_vector_from_inverse(
    params: &ModelParams,
    n: usize,
    mode: PsiMode,
) -> Result<Vec<f64>> {
    let cov = build_covariances(params, n)?;
    let inv = invert_cov_with(params, n, mode)?;
    Ok((0..n)
        .map(|j| (0..n).map(|i| cov.d_sx[i] * inv[(i, j)]).sum())
        .collect())
}

/// Estimates for every prefix `x_1..x_m`; `aux` carries `gamma_m`.
pub fn normalcorr_estimate(params: &ModelParams, xs: &[f64]) -> Result<FilterRun> {
    normalcorr_estimate_with(params, xs, CoefficientPath::Stable)
}

pub fn normalcorr_estimate_with(
    params: &ModelParams,
    xs: &[f64],
    path: CoefficientPath,
) -> Result<FilterRun> {
    if xs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let seqs = param_sequences(params, xs.len());
    let mut estimates = Vec::with_capacity(xs.len());
    for m in 1..=xs.len() {
        let coeffs = match path {
            CoefficientPath::Stable => dobrovidov_weights(params, &seqs, m),
            CoefficientPath::Psi => coefficient_vector(params, m, path)?,
        };
        estimates.push(coeffs.iter().zip(xs).map(|(c, x)| c * x).sum());
    }
    Ok(FilterRun {
        method: Method::Normalcorr,
        estimates,
        aux: seqs.gamma,
    })
}
