//! Three-term recurrences that give the closed-form inverse of the shifted
//! tridiagonal matrix `I + B^2 (D_xx|_{B=0})^{-1}`.
//!
//! ```text
//! psi_0 = 1,  psi_1 = d0 / a
//! psi_m = ((d0 + a^2) / a) psi_{m-1} - psi_{m-2}      m = 2..N-1
//! psi~_N = (d0 / a) psi_{N-1} - psi_{N-2}             terminal value
//! ```
//!
//! The values grow geometrically with ratio close to `(d0 + a^2) / |a|`,
//! so the direct table overflows for long sequences. [`ScaledPsi`] keeps
//! the same values as log-magnitudes and signs.

use crate::error::{Error, Result};
use crate::model::{derived_constants, ModelParams};

/// Largest `|psi|` accepted before reporting [`Error::PsiOverflow`].
pub const PSI_LIMIT: f64 = f64::MAX / 1e6;

/// Recurrence values for dimension `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    /// Interior values `psi_0..psi_{N-1}`.
    pub psi: Vec<f64>,
    /// Terminal value `psi~_N`.
    pub psi_last: f64,
    pub d0: f64,
}

impl PsiTable {
    pub fn dim(&self) -> usize {
        self.psi.len()
    }
}

fn check_dim(params: &ModelParams, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "psi recurrences need dimension >= 2, got {n}"
        )));
    }
    if params.a() == 0.0 {
        return Err(Error::UnsupportedZeroA);
    }
    Ok(())
}

pub fn psi_table(params: &ModelParams, n: usize) -> Result<PsiTable> {
    check_dim(params, n)?;
    let a = params.a();
    let d0 = derived_constants(params).d0;
    let inner = (d0 + a * a) / a;
    let check = |index: usize, v: f64| -> Result<f64> {
        if v.is_finite() && v.abs() <= PSI_LIMIT {
            Ok(v)
        } else {
            Err(Error::PsiOverflow { index })
        }
    };

    let mut psi = Vec::with_capacity(n);
    psi.push(1.0);
    psi.push(check(1, d0 / a)?);
    for m in 2..n {
        let v = inner * psi[m - 1] - psi[m - 2];
        psi.push(check(m, v)?);
    }
    let psi_last = check(n, d0 / a * psi[n - 1] - psi[n - 2])?;
    Ok(PsiTable { psi, psi_last, d0 })
}

/// The psi table stored as `ln|psi|` and sign, built from the ratios
/// `psi_m / psi_{m-1}`. Never overflows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPsi {
    pub log_abs: Vec<f64>,
    pub sign: Vec<f64>,
    pub log_abs_last: f64,
    pub sign_last: f64,
    pub d0: f64,
}

impl ScaledPsi {
    /// `psi_i * psi_j / psi~_N`, evaluated without forming the factors.
    pub fn product_over_last(&self, i: usize, j: usize) -> f64 {
        self.sign[i]
            * self.sign[j]
            * self.sign_last
            * (self.log_abs[i] + self.log_abs[j] - self.log_abs_last).exp()
    }

    /// `psi_i / psi~_N`.
    pub fn ratio_to_last(&self, i: usize) -> f64 {
        self.sign[i] * self.sign_last * (self.log_abs[i] - self.log_abs_last).exp()
    }
}

pub fn scaled_psi(params: &ModelParams, n: usize) -> Result<ScaledPsi> {
    check_dim(params, n)?;
    let a = params.a();
    let d0 = derived_constants(params).d0;
    let inner = (d0 + a * a) / a;

    let mut log_abs = Vec::with_capacity(n);
    let mut sign = Vec::with_capacity(n);
    log_abs.push(0.0);
    sign.push(1.0);
    let mut ratio = d0 / a;
    log_abs.push(ratio.abs().ln());
    sign.push(ratio.signum());
    for m in 2..n {
        ratio = inner - 1.0 / ratio;
        log_abs.push(log_abs[m - 1] + ratio.abs().ln());
        sign.push(sign[m - 1] * ratio.signum());
    }
    let last_ratio = d0 / a - 1.0 / ratio;
    Ok(ScaledPsi {
        log_abs_last: log_abs[n - 1] + last_ratio.abs().ln(),
        sign_last: sign[n - 1] * last_ratio.signum(),
        log_abs,
        sign,
        d0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_tables() {
        let p = ModelParams::reference();
        let t = psi_table(&p, 2).unwrap();
        assert_eq!(t.psi, vec![1.0, 3.5]);
        assert!((t.psi_last - 11.25).abs() < 1e-13);

        let t = psi_table(&p, 3).unwrap();
        assert!((t.psi[2] - 13.0).abs() < 1e-13);
        assert!((t.psi_last - 42.0).abs() < 1e-13);
        // closed form: (1 - a^2) / (B^6 a^3) * sigma_1 sigma_2 sigma_3 = 6 * 2 * 1.875 * 1.8666..
        assert!((6.0f64 * 2.0 * 1.875 * (1.8666666666666667) - 42.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_a_and_small_dims() {
        let p = ModelParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(psi_table(&p, 4), Err(Error::UnsupportedZeroA)));
        assert!(matches!(scaled_psi(&p, 4), Err(Error::UnsupportedZeroA)));
        assert!(matches!(
            psi_table(&ModelParams::reference(), 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let p = ModelParams::new(0.05, 3.0, 3.0, 0.1).unwrap();
        assert!(matches!(psi_table(&p, 200), Err(Error::PsiOverflow { .. })));
        // The scaled table carries on.
        let s = scaled_psi(&p, 200).unwrap();
        assert!(s.log_abs_last.is_finite());
    }

    #[test]
    fn scaled_matches_direct() {
        for a in [0.3, -0.3, 0.9, -0.9] {
            let p = ModelParams::new(a, 0.7, 1.3, 0.6).unwrap();
            let t = psi_table(&p, 30).unwrap();
            let s = scaled_psi(&p, 30).unwrap();
            for m in 0..30 {
                let v = s.sign[m] * s.log_abs[m].exp();
                assert!(((v - t.psi[m]) / t.psi[m]).abs() < 1e-12);
            }
            let last = s.sign_last * s.log_abs_last.exp();
            assert!(((last - t.psi_last) / t.psi_last).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_a_alternates_sign() {
        let p = ModelParams::new(-0.5, 0.8, 1.0, 1.0).unwrap();
        let t = psi_table(&p, 8).unwrap();
        for w in t.psi.windows(2) {
            assert!(w[0] * w[1] < 0.0);
        }
    }
}
