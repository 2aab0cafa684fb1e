//! Reproducible trajectories of the linear-Gaussian system and Monte-Carlo
//! covariance estimates.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; independent trial `t`
//! reads stream `t` of that generator, so results do not depend on how
//! trials are spread over threads. Within a stream the draws are taken in
//! the order `s0, xi_1, eta_1, xi_2, eta_2, ..`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::oracle::DenseMatrix;

/// Standard-normal driving noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStreams {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Hidden states `s_1..s_n`, observations `x_1..x_n` and the start `s_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub s0: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub fn simulate_with_noise(
    params: &ModelParams,
    s0: f64,
    noise: &NoiseStreams,
) -> Result<Trajectory> {
    if noise.xi.len() != noise.eta.len() {
        return Err(Error::DimensionMismatch {
            left: (noise.xi.len(), 1),
            right: (noise.eta.len(), 1),
        });
    }
    let (a, b, gain, noise_sd) = (params.a(), params.b(), params.gain(), params.noise());
    let mut s = Vec::with_capacity(noise.xi.len());
    let mut x = Vec::with_capacity(noise.xi.len());
    let mut prev = s0;
    for (xi, eta) in noise.xi.iter().zip(&noise.eta) {
        prev = a * prev + b * xi;
        s.push(prev);
        x.push(gain * prev + noise_sd * eta);
    }
    Ok(Trajectory { s, x, s0 })
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw(params: &ModelParams, n: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let s0 = params.stationary_variance().sqrt() * rng.sample::<f64, _>(StandardNormal);
    let mut xi = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for _ in 0..n {
        xi.push(rng.sample(StandardNormal));
        eta.push(rng.sample(StandardNormal));
    }
    simulate_with_noise(params, s0, &NoiseStreams { xi, eta })
        .expect("noise streams have equal length")
}

/// Trajectory of length `n` started from the stationary law.
pub fn simulate(params: &ModelParams, n: usize, seed: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "trajectory length must be >= 1".into(),
        ));
    }
    Ok(draw(params, n, &mut stream_rng(seed, 0)))
}

/// Largest dimension accepted by [`empirical_covariance`].
pub const MAX_MC_DIM: usize = 16;
/// Smallest trial count accepted by [`empirical_covariance`].
pub const MIN_MC_TRIALS: usize = 10_000;

/// Sample covariances across independent trajectories, with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCovariance {
    pub trials: usize,
    /// `cov(X_i, X_j)`.
    pub xx: DenseMatrix,
    pub xx_se: DenseMatrix,
    /// `cov(S_n, X_j)`.
    pub sx: Vec<f64>,
    pub sx_se: Vec<f64>,
}

/// Mean and standard error of the centered products `(u - u_bar)(v - v_bar)`.
fn cov_with_se(u: &[f64], v: &[f64]) -> (f64, f64) {
    let t = u.len() as f64;
    let mu = u.iter().sum::<f64>() / t;
    let mv = v.iter().sum::<f64>() / t;
    let prods: Vec<f64> = u.iter().zip(v).map(|(p, q)| (p - mu) * (q - mv)).collect();
    let mean = prods.iter().sum::<f64>() / t;
    let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean * t / (t - 1.0), (var / t).sqrt())
}

/// Monte-Carlo covariance of `(X_1..X_n)` and of `S_n` with each `X_j`.
///
/// Trial `t` uses stream `t`. With `parallel` the trials run on the rayon
/// pool; statistics are always reduced in trial order, so both settings
/// give bit-identical results.
pub fn empirical_covariance(
    params: &ModelParams,
    n: usize,
    trials: usize,
    seed: u64,
    parallel: bool,
) -> Result<EmpiricalCovariance> {
    if n == 0 || n > MAX_MC_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension must be in 1..={MAX_MC_DIM}, got {n}"
        )));
    }
    if trials < MIN_MC_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_MC_TRIALS} trials, got {trials}"
        )));
    }
    let run = |t: usize| draw(params, n, &mut stream_rng(seed, t as u64));
    let paths: Vec<Trajectory> = if parallel {
        (0..trials).into_par_iter().map(run).collect()
    } else {
        (0..trials).map(run).collect()
    };

    // Column-major copies: xs[j][t] = x_{j+1} of trial t.
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|j| paths.iter().map(|p| p.x[j]).collect())
        .collect();
    let s_last: Vec<f64> = paths.iter().map(|p| p.s[n - 1]).collect();

    let mut xx = DenseMatrix::zeros(n, n);
    let mut xx_se = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (c, se) = cov_with_se(&xs[i], &xs[j]);
            xx[(i, j)] = c;
            xx[(j, i)] = c;
            xx_se[(i, j)] = se;
            xx_se[(j, i)] = se;
        }
    }
    let (sx, sx_se) = xs.iter().map(|col| cov_with_se(&s_last, col)).unzip();
    Ok(EmpiricalCovariance {
        trials,
        xx,
        xx_se,
        sx,
        sx_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_ref() -> ModelParams {
        ModelParams::new(0.5, 0.8660254, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_noise_decays() {
        let noise = NoiseStreams {
            xi: vec![0.0, 0.0],
            eta: vec![0.0, 0.0],
        };
        let t = simulate_with_noise(&p_ref(), 1.0, &noise).unwrap();
        assert_eq!(t.s, vec![0.5, 0.25]);
        assert_eq!(t.x, vec![0.5, 0.25]);
    }

    #[test]
    fn single_kicks() {
        let noise = NoiseStreams {
            xi: vec![1.0, 0.0],
            eta: vec![-1.0, 0.0],
        };
        let t = simulate_with_noise(&p_ref(), 0.0, &noise).unwrap();
        assert!((t.s[0] - 0.8660254).abs() < 1e-15);
        assert!((t.s[1] - 0.4330127).abs() < 1e-15);
        assert!((t.x[0] + 0.1339746).abs() < 1e-15);
        assert!((t.x[1] - 0.4330127).abs() < 1e-15);

        let pure = NoiseStreams {
            xi: vec![0.0],
            eta: vec![1.0],
        };
        let t = simulate_with_noise(&p_ref(), 0.0, &pure).unwrap();
        assert_eq!((t.s[0], t.x[0]), (0.0, 1.0));
    }

    #[test]
    fn noiseless_observations_recover_states() {
        let p = ModelParams::new(-0.7, 1.3, 2.5, 0.4).unwrap();
        let xi: Vec<f64> = (0..100).map(|k| (k as f64 * 0.7).cos()).collect();
        let t = simulate_with_noise(
            &p,
            0.3,
            &NoiseStreams {
                xi,
                eta: vec![0.0; 100],
            },
        )
        .unwrap();
        for (s, x) in t.s.iter().zip(&t.x) {
            assert!((x / p.gain() - s).abs() <= 1e-15 * s.abs().max(1.0));
        }
    }

    #[test]
    fn mismatched_noise_rejected() {
        let noise = NoiseStreams {
            xi: vec![0.0; 3],
            eta: vec![0.0; 2],
        };
        assert!(simulate_with_noise(&p_ref(), 0.0, &noise).is_err());
    }

    #[test]
    fn deterministic_by_seed() {
        let p = ModelParams::reference();
        assert_eq!(
            simulate(&p, 1000, 42).unwrap(),
            simulate(&p, 1000, 42).unwrap()
        );
        assert_ne!(
            simulate(&p, 10, 42).unwrap().x,
            simulate(&p, 10, 43).unwrap().x
        );
        assert!(simulate(&p, 0, 1).is_err());
    }

    #[test]
    fn long_run_moments() {
        let p = ModelParams::reference();
        let n = 100_000;
        let t = simulate(&p, n, 7).unwrap();
        // The chain is correlated; 4 sigma bound uses the AR(1) long-run variance.
        let var_s = p.stationary_variance();
        let a = p.a();
        let mean_s = t.s.iter().sum::<f64>() / n as f64;
        let long_run_sd = (var_s * (1.0 + a) / (1.0 - a) / n as f64).sqrt();
        assert!(mean_s.abs() < 4.0 * long_run_sd);

        let mean_x = t.x.iter().sum::<f64>() / n as f64;
        let var_x = t.x.iter().map(|x| (x - mean_x).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Var of the sample variance for a correlated Gaussian series: 2 sum_h c_h^2 / n.
        let c0 = 2.0;
        let c1 = p.gain_sq() * var_s * a;
        let sum_sq = c0 * c0 + 2.0 * c1 * c1 / (1.0 - a * a);
        let se = (2.0 * sum_sq / n as f64).sqrt();
        assert!((var_x - 2.0).abs() < 4.0 * se, "var_x = {var_x}");
    }

    #[test]
    fn covariance_matches_theory() {
        let p = ModelParams::reference();
        let emp = empirical_covariance(&p, 2, 200_000, 11, true).unwrap();
        assert!((emp.xx[(0, 0)] - 2.0).abs() < 4.0 * emp.xx_se[(0, 0)]);
        assert!((emp.xx[(0, 1)] - 0.5).abs() < 4.0 * emp.xx_se[(0, 1)]);
        assert!((emp.sx[0] - 0.5).abs() < 4.0 * emp.sx_se[0]);

        let p0 = ModelParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        let emp = empirical_covariance(&p0, 3, 20_000, 3, true).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(emp.xx[(i, j)].abs() < 4.0 * emp.xx_se[(i, j)]);
        }
    }

    #[test]
    fn parallel_equals_serial() {
        let p = ModelParams::new(-0.3, 0.6, 1.1, 0.9).unwrap();
        let par = empirical_covariance(&p, 4, 10_000, 5, true).unwrap();
        let ser = empirical_covariance(&p, 4, 10_000, 5, false).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn rejects_bad_sizes() {
        let p = ModelParams::reference();
        assert!(empirical_covariance(&p, 17, 10_000, 0, false).is_err());
        assert!(empirical_covariance(&p, 0, 10_000, 0, false).is_err());
        assert!(empirical_covariance(&p, 2, 9_999, 0, false).is_err());
    }
}
