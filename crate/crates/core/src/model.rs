//! Model coefficients and the scalar recursions shared by every estimator.
//!
//! The partially observed system is
//!
//! ```text
//! S_n = a S_{n-1} + b xi_n
//! X_n = A S_n     + B eta_n
//! ```
//!
//! with `xi`, `eta` independent standard normal and `S_0 ~ N(0, b^2 / (1 - a^2))`.
//! The hidden chain is started from its stationary law, so every `S_n` has
//! variance `b^2 / (1 - a^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `(a, b, A, B)` of the linear-Gaussian system.
///
/// Construction validates `|a| < 1`, `b > 0`, `B > 0`, `A != 0`; a value of
/// this type is always a usable model. Serialized as the flat JSON object
/// `{"a": .., "b": .., "A": .., "B": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    a: f64,
    b: f64,
    gain: f64,
    noise: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    a: f64,
    b: f64,
    #[serde(rename = "A")]
    gain: f64,
    #[serde(rename = "B")]
    noise: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.a, raw.b, raw.gain, raw.noise)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            a: p.a,
            b: p.b,
            gain: p.gain,
            noise: p.noise,
        }
    }
}

/// Checks the model constraints, naming the first one violated.
pub fn validate(a: f64, b: f64, gain: f64, noise: f64) -> Result<()> {
    if ![a, b, gain, noise].iter().all(|v| v.is_finite()) {
        return Err(Error::DegenerateModel("finite coefficients"));
    }
    if a.abs() >= 1.0 {
        return Err(Error::DegenerateModel("|a|<1"));
    }
    if b <= 0.0 {
        return Err(Error::DegenerateModel("b>0"));
    }
    if noise <= 0.0 {
        return Err(Error::DegenerateModel("B>0"));
    }
    if gain == 0.0 {
        return Err(Error::DegenerateModel("A≠0"));
    }
    Ok(())
}

impl ModelParams {
    /// `a` is the state transition coefficient, `b` the state noise scale,
    /// `gain` the observation gain `A` and `noise` the observation noise scale `B`.
    pub fn new(a: f64, b: f64, gain: f64, noise: f64) -> Result<Self> {
        validate(a, b, gain, noise)?;
        Ok(Self { a, b, gain, noise })
    }

    /// The reference model `a = 0.5`, `b^2 = 0.75`, `A = B = 1`, whose
    /// stationary variance is exactly 1.
    pub fn reference() -> Self {
        Self {
            a: 0.5,
            b: 0.75f64.sqrt(),
            gain: 1.0,
            noise: 1.0,
        }
    }

    /// Same model with a different transition coefficient.
    pub fn with_a(self, a: f64) -> Result<Self> {
        Self::new(a, self.b, self.gain, self.noise)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Observation gain `A`.
    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Observation noise scale `B`.
    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn b_sq(&self) -> f64 {
        self.b * self.b
    }

    pub fn gain_sq(&self) -> f64 {
        self.gain * self.gain
    }

    pub fn noise_sq(&self) -> f64 {
        self.noise * self.noise
    }

    /// Stationary variance `b^2 / (1 - a^2)` of the hidden chain.
    pub fn stationary_variance(&self) -> f64 {
        self.b_sq() / (1.0 - self.a * self.a)
    }
}

/// Per-step recursion values. Slot `i` holds step `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSequences {
    /// Predictive state variance `kappa_k`.
    pub kappa: Vec<f64>,
    /// Predictive observation variance `sigma_k = B^2 + A^2 kappa_k`.
    pub sigma: Vec<f64>,
    /// Filtering error variance `gamma_k = B^2 kappa_k / sigma_k`.
    pub gamma: Vec<f64>,
}

impl ParamSequences {
    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }
}

/// Evaluates `kappa`, `sigma` and `gamma` for steps `1..=n`.
///
/// `kappa_1` is the stationary variance and
/// `kappa_k = (B^2 a^2 kappa_{k-1} + sigma_{k-1} b^2) / sigma_{k-1}`.
pub fn param_sequences(params: &ModelParams, n: usize) -> ParamSequences {
    let (a_sq, b_sq, gain_sq, noise_sq) = (
        params.a * params.a,
        params.b_sq(),
        params.gain_sq(),
        params.noise_sq(),
    );
    let mut kappa = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut k = params.stationary_variance();
    for step in 0..n {
        if step > 0 {
            let s_prev = sigma[step - 1];
            k = (noise_sq * a_sq * k + s_prev * b_sq) / s_prev;
        }
        let s = noise_sq + gain_sq * k;
        kappa.push(k);
        sigma.push(s);
        gamma.push(noise_sq * k / s);
    }
    ParamSequences {
        kappa,
        sigma,
        gamma,
    }
}

/// Limit `kappa*` of the predictive variance recursion.
///
/// `sigma* = B^2 + A^2 kappa*` is the larger root of
/// `sigma^2 - (B^2 (1 + a^2) + A^2 b^2) sigma + B^4 a^2 = 0`.
pub fn riccati_fixed_point(params: &ModelParams) -> f64 {
    let noise_sq = params.noise_sq();
    let a_sq = params.a * params.a;
    let c = noise_sq * (1.0 + a_sq) + params.gain_sq() * params.b_sq();
    let disc = c * c - 4.0 * noise_sq * noise_sq * a_sq;
    let sigma_star = 0.5 * (c + disc.max(0.0).sqrt());
    (sigma_star - noise_sq) / params.gain_sq()
}

/// Constants of the structured covariance matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// `c1 = A^2 kappa_1`, the Toeplitz part of `var(X_n)`.
    pub c1: f64,
    /// `d0 = 1 + c1 (1 - a^2) / B^2 = 1 + A^2 b^2 / B^2`.
    pub d0: f64,
    /// `d0 - 1 = A^2 b^2 / B^2`, evaluated without the subtraction.
    pub d0_minus_one: f64,
    pub sigma_tilde_sq: f64,
}

pub fn derived_constants(params: &ModelParams) -> DerivedConstants {
    let sigma_tilde_sq = params.stationary_variance();
    let c1 = params.gain_sq() * sigma_tilde_sq;
    let d0_minus_one = params.gain_sq() * params.b_sq() / params.noise_sq();
    DerivedConstants {
        c1,
        d0: 1.0 + d0_minus_one,
        d0_minus_one,
        sigma_tilde_sq,
    }
}
