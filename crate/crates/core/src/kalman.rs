//! Scalar Kalman filter written in the `(a, b, A, B)` parameterization.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::run::{FilterRun, Method};

/// Filter state after `step` observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    /// `E(S_step | x_1..x_step)`.
    pub estimate: f64,
    /// Conditional error variance `gamma_step`.
    pub gamma: f64,
    /// Number of observations absorbed (1-based).
    pub step: usize,
}

/// Algebraic form of the update.
///
/// Both forms compute the same filter. `Gain` writes the coefficients as
/// `A kappa_{n+1} / sigma_{n+1}` and `a B^2 / sigma_{n+1}` with
/// `kappa_{n+1} = b^2 + a^2 gamma_n`; `Raw` evaluates the textbook
/// numerator/denominator expression and the gamma recursion literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KalmanForm {
    #[default]
    Gain,
    Raw,
}

/// State after the first observation, from the stationary prior.
pub fn kalman_init(params: &ModelParams, x1: f64) -> KalmanState {
    let var0 = params.stationary_variance();
    let denom = params.gain_sq() * var0 + params.noise_sq();
    KalmanState {
        estimate: params.gain() * var0 * x1 / denom,
        gamma: params.noise_sq() * var0 / denom,
        step: 1,
    }
}

pub fn kalman_step(params: &ModelParams, state: &KalmanState, x_next: f64) -> KalmanState {
    kalman_step_with(params, state, x_next, KalmanForm::Gain)
}

pub fn kalman_step_with(
    params: &ModelParams,
    state: &KalmanState,
    x_next: f64,
    form: KalmanForm,
) -> KalmanState {
    let (a, gain) = (params.a(), params.gain());
    let (b_sq, noise_sq, gain_sq) = (params.b_sq(), params.noise_sq(), params.gain_sq());
    let g = state.gamma;
    let (estimate, gamma) = match form {
        KalmanForm::Gain => {
            let kappa = b_sq + a * a * g;
            let sigma = noise_sq + gain_sq * kappa;
            (
                gain * kappa / sigma * x_next + a * noise_sq / sigma * state.estimate,
                noise_sq * kappa / sigma,
            )
        }
        KalmanForm::Raw => {
            let denom = noise_sq + gain_sq * b_sq + gain_sq * a * a * g;
            let est =
                ((gain * b_sq + a * a * gain * g) * x_next + a * noise_sq * state.estimate) / denom;
            let pred = a * a * g + b_sq;
            (est, noise_sq * pred / (gain_sq * pred + noise_sq))
        }
    };
    KalmanState {
        estimate,
        gamma,
        step: state.step + 1,
    }
}

/// Runs the filter over `xs`; `aux` carries `gamma_n`.
pub fn kalman_filter(params: &ModelParams, xs: &[f64]) -> Result<FilterRun> {
    kalman_filter_with(params, xs, KalmanForm::Gain)
}

pub fn kalman_filter_with(params: &ModelParams, xs: &[f64], form: KalmanForm) -> Result<FilterRun> {
    let (&first, rest) = xs.split_first().ok_or(Error::EmptyObservations)?;
    let mut state = kalman_init(params, first);
    let mut estimates = Vec::with_capacity(xs.len());
    let mut aux = Vec::with_capacity(xs.len());
    estimates.push(state.estimate);
    aux.push(state.gamma);
    for &x in rest {
        state = kalman_step_with(params, &state, x, form);
        estimates.push(state.estimate);
        aux.push(state.gamma);
    }
    Ok(FilterRun {
        method: Method::Kalman,
        estimates,
        aux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{param_sequences, riccati_fixed_point};

    fn p_ref() -> ModelParams {
        ModelParams::reference()
    }

    #[test]
    fn init_examples() {
        let s = kalman_init(&p_ref(), 1.0);
        assert!((s.estimate - 0.5).abs() < 1e-15);
        assert!((s.gamma - 0.5).abs() < 1e-15);
        assert_eq!(s.step, 1);
        assert_eq!(kalman_init(&p_ref(), 0.0).estimate, 0.0);
        let p = ModelParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((kalman_init(&p, 2.0).estimate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn step_examples() {
        let start = KalmanState {
            estimate: 0.5,
            gamma: 0.5,
            step: 1,
        };
        for form in [KalmanForm::Gain, KalmanForm::Raw] {
            let next = kalman_step_with(&p_ref(), &start, 0.5, form);
            assert!((next.estimate - 0.36666666666666664).abs() < 1e-15);
            assert!((next.gamma - 0.4666666666666667).abs() < 1e-15);
            assert_eq!(next.step, 2);
        }
        let zero = KalmanState {
            estimate: 0.0,
            ..start
        };
        assert_eq!(kalman_step(&p_ref(), &zero, 0.0).estimate, 0.0);
    }

    #[test]
    fn filter_examples() {
        let run = kalman_filter(&p_ref(), &[1.0, 0.5]).unwrap();
        assert!((run.estimates[0] - 0.5).abs() < 1e-15);
        assert!((run.estimates[1] - 0.36666666666666664).abs() < 1e-15);
        assert_eq!(run.method, Method::Kalman);

        let zeros = kalman_filter(&p_ref(), &[0.0; 10]).unwrap();
        assert!(zeros.estimates.iter().all(|&e| e == 0.0));

        assert!(matches!(
            kalman_filter(&p_ref(), &[]),
            Err(Error::EmptyObservations)
        ));
    }

    #[test]
    fn gamma_converges_to_riccati_limit() {
        for p in [p_ref(), ModelParams::new(-0.9, 0.1, 2.0, 0.5).unwrap()] {
            let run = kalman_filter(&p, &[0.3; 200]).unwrap();
            let k = riccati_fixed_point(&p);
            let limit = p.noise_sq() * k / (p.noise_sq() + p.gain_sq() * k);
            assert!((run.aux[199] - limit).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma_matches_kappa_over_sigma() {
        let p = ModelParams::new(0.8, 1.3, -0.7, 0.4).unwrap();
        let seqs = param_sequences(&p, 1000);
        let run = kalman_filter_with(&p, &vec![1.0; 1000], KalmanForm::Raw).unwrap();
        for (g, expected) in run.aux.iter().zip(&seqs.gamma) {
            assert!(((g - expected) / expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn error_variance_bounded() {
        let p = ModelParams::new(0.95, 2.0, 0.2, 3.0).unwrap();
        let run = kalman_filter(&p, &[1.0; 300]).unwrap();
        let upper = p.stationary_variance() + p.b_sq();
        assert!(run.aux.iter().all(|&g| g > 0.0 && g < upper));
    }

    #[test]
    fn linear_in_observations() {
        let p = ModelParams::new(-0.4, 0.7, 1.8, 0.9).unwrap();
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let scaled: Vec<f64> = xs.iter().map(|x| 4.0 * x).collect();
        let base = kalman_filter(&p, &xs).unwrap();
        let run = kalman_filter(&p, &scaled).unwrap();
        for (u, v) in base.estimates.iter().zip(&run.estimates) {
            assert_eq!(4.0 * u, *v);
        }
    }
}
