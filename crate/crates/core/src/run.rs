use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which estimator produced a [`FilterRun`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Kalman,
    DobrovidovRecursive,
    DobrovidovDirect,
    DobrovidovScore,
    Normalcorr,
    GridOracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Kalman,
        Method::DobrovidovRecursive,
        Method::DobrovidovDirect,
        Method::DobrovidovScore,
        Method::Normalcorr,
        Method::GridOracle,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Kalman => "kalman",
            Method::DobrovidovRecursive => "dobrovidov-recursive",
            Method::DobrovidovDirect => "dobrovidov-direct",
            Method::DobrovidovScore => "dobrovidov-score",
            Method::Normalcorr => "normalcorr",
            Method::GridOracle => "grid-oracle",
        }
    }

    /// What the `aux` column carries for this method.
    pub fn aux_meaning(self) -> &'static str {
        match self {
            Method::Kalman | Method::Normalcorr => "gamma_n (filtering error variance)",
            Method::DobrovidovRecursive | Method::DobrovidovDirect | Method::DobrovidovScore => {
                "sigma_n (predictive observation variance)"
            }
            Method::GridOracle => "grid posterior variance",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = String;

    /// Accepts the canonical tags plus the short forms `dobrovidov` and `grid`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dobrovidov" => return Ok(Method::DobrovidovRecursive),
            "grid" => return Ok(Method::GridOracle),
            _ => {}
        }
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Per-step conditional means `E(S_k | x_1..x_k)` from one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub method: Method,
    pub estimates: Vec<f64>,
    /// Per-step auxiliary value; see [`Method::aux_meaning`].
    pub aux: Vec<f64>,
}

impl FilterRun {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.estimates.last().copied()
    }
}
