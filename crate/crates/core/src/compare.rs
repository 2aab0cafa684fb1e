//! Side-by-side evaluation of several estimators on one observation sequence.

use serde::Serialize;

use crate::dobrovidov::{
    dobrovidov_direct, dobrovidov_recursive, dobrovidov_score, grid_bayes_oracle, GridSpec,
};
use crate::error::{Error, Result};
use crate::kalman::kalman_filter;
use crate::model::ModelParams;
use crate::normalcorr::normalcorr_estimate;
use crate::run::{FilterRun, Method};

/// Schema version of [`CompareReport`].
pub const REPORT_VERSION: u32 = 1;

/// Runs `method` on `xs`. `grid` is only used by the grid oracle.
pub fn run_method(
    params: &ModelParams,
    method: Method,
    xs: &[f64],
    grid: GridSpec,
) -> Result<FilterRun> {
    match method {
        Method::Kalman => kalman_filter(params, xs),
        Method::DobrovidovRecursive => dobrovidov_recursive(params, xs),
        Method::DobrovidovDirect => dobrovidov_direct(params, xs),
        Method::DobrovidovScore => dobrovidov_score(params, xs),
        Method::Normalcorr => normalcorr_estimate(params, xs),
        Method::GridOracle => grid_bayes_oracle(params, xs, grid),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDivergence {
    pub left: Method,
    pub right: Method,
    /// `max_t |left_t - right_t|`.
    pub max_abs_divergence: f64,
    /// 1-based step where the maximum occurs.
    pub at_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub t: usize,
    /// One estimate per method, in report order.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub version: u32,
    pub methods: Vec<Method>,
    pub steps: usize,
    pub tol: f64,
    pub pairs: Vec<PairDivergence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_step: Option<Vec<StepRow>>,
    /// True iff every pair stays within `tol`.
    pub pass: bool,
}

impl CompareReport {
    pub fn max_divergence(&self) -> f64 {
        self.pairs
            .iter()
            .fold(0.0, |acc, p| acc.max(p.max_abs_divergence))
    }
}

/// Pairwise divergences between runs of equal length.
pub fn compare_runs(runs: &[FilterRun], tol: f64, per_step: bool) -> Result<CompareReport> {
    if runs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two methods to compare".into(),
        ));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let steps = runs[0].len();
    if let Some(r) = runs.iter().find(|r| r.len() != steps) {
        return Err(Error::DimensionMismatch {
            left: (steps, 1),
            right: (r.len(), 1),
        });
    }
    let mut pairs = Vec::new();
    for (i, left) in runs.iter().enumerate() {
        for right in &runs[i + 1..] {
            let (at, max) = left
                .estimates
                .iter()
                .zip(&right.estimates)
                .map(|(u, v)| (u - v).abs())
                .enumerate()
                // NaN compares as the largest value so it can't hide.
                .fold((0, 0.0f64), |best, (t, d)| {
                    if d.is_nan() || d > best.1 {
                        (t, d)
                    } else {
                        best
                    }
                });
            pairs.push(PairDivergence {
                left: left.method,
                right: right.method,
                max_abs_divergence: max,
                at_step: at + 1,
            });
        }
    }
    let pass = pairs.iter().all(|p| p.max_abs_divergence <= tol);
    let per_step = per_step.then(|| {
        (0..steps)
            .map(|t| StepRow {
                t: t + 1,
                estimates: runs.iter().map(|r| r.estimates[t]).collect(),
            })
            .collect()
    });
    Ok(CompareReport {
        version: REPORT_VERSION,
        methods: runs.iter().map(|r| r.method).collect(),
        steps,
        tol,
        pairs,
        per_step,
        pass,
    })
}
