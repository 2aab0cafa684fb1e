//! `lgfilter`: simulate, filter, compare and invert from the command line.
//!
//! Exit codes: 0 success, 1 methods diverge beyond tolerance, 2 usage or
//! invalid parameters, 3 I/O failure, 4 malformed input file.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgfilter::Method;

#[derive(Debug, Parser)]
#[command(
    name = "lgfilter",
    version,
    about = "Equivalent filters for the scalar linear-Gaussian model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a trajectory and write it as `t,s,x` CSV.
    Simulate(SimulateArgs),
    /// Run one estimator over an observation file.
    Filter(FilterArgs),
    /// Run several estimators and report their pairwise divergence as JSON.
    Compare(CompareArgs),
    /// Invert the observation covariance in closed form.
    Invert(InvertArgs),
}

/// Model coefficients, from `--params` or the four inline flags.
#[derive(Debug, Args)]
struct ParamArgs {
    /// JSON file `{"a": .., "b": .., "A": .., "B": ..}`.
    #[arg(long, conflicts_with_all = ["a", "b", "gain", "noise"])]
    params: Option<PathBuf>,
    /// State autoregression coefficient, |a| < 1.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// State noise scale, b > 0.
    #[arg(long)]
    b: Option<f64>,
    /// Observation gain, A != 0.
    #[arg(long = "A", id = "gain", allow_negative_numbers = true)]
    gain: Option<f64>,
    /// Observation noise scale, B > 0.
    #[arg(long = "B", id = "noise")]
    noise: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Number of steps.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Grid nodes for the grid oracle (odd, >= 501).
    #[arg(long, default_value_t = 2001)]
    grid_points: usize,
    /// Grid half width in stationary standard deviations (>= 6).
    #[arg(long, default_value_t = 8.0)]
    grid_width: f64,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// kalman, dobrovidov, dobrovidov-direct, dobrovidov-score, normalcorr or grid.
    #[arg(long)]
    method: Method,
    /// Trajectory CSV with columns `t,x` and optionally `s`.
    #[arg(long)]
    traj: PathBuf,
    /// Output CSV `t,estimate,aux`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the total log-likelihood (dobrovidov methods only).
    #[arg(long)]
    loglik: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Comma-separated method list, at least two.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    methods: Vec<Method>,
    /// Largest accepted pairwise divergence.
    #[arg(long)]
    tol: f64,
    /// Trajectory CSV to filter.
    #[arg(
        long,
        conflicts_with = "simulate",
        required_unless_present = "simulate"
    )]
    traj: Option<PathBuf>,
    /// Simulate this many steps instead of reading a file.
    #[arg(long)]
    simulate: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include every step's estimates in the report.
    #[arg(long)]
    per_step: bool,
    /// Shift `a` by this amount for every method after the first (negative control).
    #[arg(long, hide = true, allow_negative_numbers = true)]
    perturb_a: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Matrix dimension.
    #[arg(long)]
    n: usize,
    /// Also invert by Gaussian elimination and report the difference.
    #[arg(long)]
    oracle: bool,
    /// Require the plain psi table; fail instead of switching to the log-scaled one.
    #[arg(long)]
    psi_path: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Filter(args) => commands::filter(args),
        Command::Compare(args) => commands::compare(args),
        Command::Invert(args) => commands::invert(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
