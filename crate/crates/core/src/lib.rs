//! Conditional-mean estimators for the scalar partially observed system
//!
//! ```text
//! S_n = a S_{n-1} + b xi_n,    X_n = A S_n + B eta_n
//! ```
//!
//! Three constructions of `E(S_n | x_1..x_n)` are provided and cross-checked:
//!
//! * [`kalman`]: the Kalman recursion;
//! * [`dobrovidov`]: the filtering equation written through the predictive
//!   density of the observations, in score, explicit-sum and recursive forms,
//!   plus a brute-force grid posterior used as an oracle;
//! * [`normalcorr`]: the normal-correlation formula `D_sx D_xx^{-1} x` with
//!   the Toeplitz-plus-diagonal covariance inverted in closed form.
//!
//! Steps are 1-based in the mathematics and 0-based in slices: slot `i` of
//! every per-step vector holds step `i + 1`.

pub mod compare;
pub mod dobrovidov;
pub mod error;
pub mod io;
pub mod kalman;
pub mod model;
pub mod normalcorr;
pub mod oracle;
pub mod run;
pub mod simulate;

pub use compare::{compare_runs, run_method, CompareReport, PairDivergence, REPORT_VERSION};
pub use dobrovidov::{
    dobrovidov_direct, dobrovidov_recursive, dobrovidov_score, grid_bayes_oracle, GridSpec,
};
pub use error::{Error, Result};
pub use kalman::{kalman_filter, KalmanForm, KalmanState};
pub use model::{
    derived_constants, param_sequences, riccati_fixed_point, ModelParams, ParamSequences,
};
pub use normalcorr::{
    build_covariances, coefficient_vector, invert_cov, normalcorr_estimate, CoefficientPath,
    PsiMode, StructuredCovariance,
};
pub use oracle::{dense_invert, DenseMatrix};
pub use run::{FilterRun, Method};
pub use simulate::{empirical_covariance, simulate, simulate_with_noise, NoiseStreams, Trajectory};
