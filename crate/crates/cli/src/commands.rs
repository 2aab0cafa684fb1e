use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use lgfilter::compare::{compare_runs, run_method};
use lgfilter::dobrovidov::log_likelihood;
use lgfilter::io::{read_observations, read_params_json, write_estimates, write_trajectory};
use lgfilter::normalcorr::{build_covariances, invert_cov_with, PsiMode};
use lgfilter::oracle::{dense_invert, identity_residual, max_abs_diff};
use lgfilter::{simulate as simulate_trajectory, Error, FilterRun, GridSpec, Method, ModelParams};
use serde::Serialize;

use crate::{CompareArgs, FilterArgs, Format, GridArgs, InvertArgs, ParamArgs, SimulateArgs};

pub const EXIT_DIVERGED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PARSE: u8 = 4;

/// Schema version of the `invert` JSON report.
const INVERT_REPORT_VERSION: u32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn at(path: &Path, err: Error) -> Self {
        let mut e = Self::from(err);
        e.message = format!("{}: {}", path.display(), e.message);
        e
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Io(_) => EXIT_IO,
            Error::Csv { .. } | Error::Json(_) | Error::EmptyObservations => EXIT_PARSE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

type CliResult<T = u8> = Result<T, CliError>;

impl ParamArgs {
    fn resolve(&self) -> CliResult<ModelParams> {
        if let Some(path) = &self.params {
            let file = File::open(path).map_err(|e| CliError::at(path, e.into()))?;
            return read_params_json(BufReader::new(file)).map_err(|e| CliError::at(path, e));
        }
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::usage(format!("missing {flag} (or pass --params)")))
        };
        let (a, b) = (need(self.a, "--a")?, need(self.b, "--b")?);
        let (gain, noise) = (need(self.gain, "--A")?, need(self.noise, "--B")?);
        Ok(ModelParams::new(a, b, gain, noise)?)
    }
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            half_width_sds: self.grid_width,
            points: self.grid_points,
        }
    }
}

/// Where the primary output goes. Side information goes to stdout when the
/// primary output is a file and to stderr otherwise.
struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    fn new(path: &Option<PathBuf>) -> Self {
        Self { path: path.clone() }
    }

    fn write(&self, f: impl FnOnce(&mut dyn Write) -> lgfilter::Result<()>) -> CliResult<()> {
        match &self.path {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::at(path, e.into()))?;
                let mut w = BufWriter::new(file);
                f(&mut w).map_err(|e| CliError::at(path, e))?;
                w.flush().map_err(|e| CliError::at(path, e.into()))
            }
            None => {
                let mut w = io::stdout().lock();
                f(&mut w)?;
                w.flush().map_err(|e| Error::Io(e).into())
            }
        }
    }

    fn note(&self, line: &str) {
        if self.path.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

pub fn simulate(args: SimulateArgs) -> CliResult {
    let params = args.params.resolve()?;
    if args.n == 0 {
        return Err(CliError::usage("--n must be >= 1"));
    }
    let traj = simulate_trajectory(&params, args.n, args.seed)?;
    let sink = Sink::new(&args.out);
    sink.write(|w| write_trajectory(w, &traj))?;
    let (ms, vs) = mean_var(&traj.s);
    let (mx, vx) = mean_var(&traj.x);
    sink.note(&format!(
        "n={} seed={} s: mean={ms:.6} var={vs:.6} x: mean={mx:.6} var={vx:.6}",
        args.n, args.seed
    ));
    Ok(0)
}

fn read_xs(path: &Path) -> CliResult<Vec<f64>> {
    let file = File::open(path).map_err(|e| CliError::at(path, e.into()))?;
    Ok(read_observations(BufReader::new(file))
        .map_err(|e| CliError::at(path, e))?
        .x)
}

fn is_dobrovidov(method: Method) -> bool {
    matches!(
        method,
        Method::DobrovidovRecursive | Method::DobrovidovDirect | Method::DobrovidovScore
    )
}

pub fn filter(args: FilterArgs) -> CliResult {
    if args.loglik && !is_dobrovidov(args.method) {
        return Err(CliError::usage(format!(
            "--loglik needs a dobrovidov method, got {}",
            args.method
        )));
    }
    let params = args.params.resolve()?;
    let xs = read_xs(&args.traj)?;
    let run = run_method(&params, args.method, &xs, args.grid.spec())?;
    let sink = Sink::new(&args.out);
    sink.write(|w| write_estimates(w, &run))?;
    if args.loglik {
        sink.note(&format!(
            "log-likelihood: {}",
            log_likelihood(&params, &xs)?
        ));
    }
    Ok(0)
}

pub fn compare(args: CompareArgs) -> CliResult {
    if args.methods.len() < 2 {
        return Err(CliError::usage("--methods needs at least two entries"));
    }
    let params = args.params.resolve()?;
    let xs = match (&args.traj, args.simulate) {
        (Some(path), _) => read_xs(path)?,
        (None, Some(0)) => return Err(CliError::usage("--simulate must be >= 1")),
        (None, Some(n)) => simulate_trajectory(&params, n, args.seed)?.x,
        (None, None) => unreachable!("clap requires --traj or --simulate"),
    };
    let perturbed = match args.perturb_a {
        Some(delta) => params.with_a(params.a() + delta)?,
        None => params,
    };
    let grid = args.grid.spec();

    // Methods are independent, so each runs on its own thread.
    let runs: Vec<lgfilter::Result<FilterRun>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .methods
            .iter()
            .enumerate()
            .map(|(i, &method)| {
                let p = if i == 0 { params } else { perturbed };
                let xs = &xs;
                scope.spawn(move || run_method(&p, method, xs, grid))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("estimator thread panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<lgfilter::Result<Vec<_>>>()?;
    let report = compare_runs(&runs, args.tol, args.per_step)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::usage(e.to_string()))?;
    println!("{json}");
    Ok(if report.pass { 0 } else { EXIT_DIVERGED })
}

#[derive(Serialize)]
struct OracleReport {
    max_abs_diff: f64,
    dense_residual: f64,
}

#[derive(Serialize)]
struct InvertReport {
    version: u32,
    n: usize,
    params: ModelParams,
    /// `direct`, `scaled`, or `none` when no psi values are needed.
    psi_mode: &'static str,
    d_xx: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
    /// `max |D_xx * inverse - I|`.
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

pub fn invert(args: InvertArgs) -> CliResult {
    let params = args.params.resolve()?;
    if args.n == 0 {
        return Err(CliError::usage("--n must be >= 1"));
    }
    let n = args.n;
    let uses_psi = n >= 2 && params.a() != 0.0;
    let (inverse, psi_mode) = match invert_cov_with(&params, n, PsiMode::Direct) {
        Ok(m) => (m, if uses_psi { "direct" } else { "none" }),
        Err(Error::PsiOverflow { .. }) if !args.psi_path => {
            (invert_cov_with(&params, n, PsiMode::Scaled)?, "scaled")
        }
        Err(e) => return Err(e.into()),
    };
    let cov = build_covariances(&params, n)?;
    let residual = identity_residual(&cov.d_xx, &inverse)?;
    let oracle = if args.oracle {
        let dense = dense_invert(&cov.d_xx)?;
        Some(OracleReport {
            max_abs_diff: max_abs_diff(&inverse, &dense.inverse)?,
            dense_residual: dense.residual,
        })
    } else {
        None
    };

    let sink = Sink::new(&args.out);
    match args.format {
        Format::Json => {
            let report = InvertReport {
                version: INVERT_REPORT_VERSION,
                n,
                params,
                psi_mode,
                d_xx: cov.d_xx.to_rows(),
                inverse: inverse.to_rows(),
                residual,
                oracle,
            };
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::usage(e.to_string()))?;
            sink.write(|w| Ok(writeln!(w, "{json}")?))?;
        }
        Format::Csv => {
            sink.write(|w| {
                writeln!(w, "i,j,value")?;
                for i in 0..n {
                    for j in 0..n {
                        writeln!(w, "{},{},{}", i + 1, j + 1, inverse[(i, j)])?;
                    }
                }
                Ok(())
            })?;
            sink.note(&format!("psi_mode: {psi_mode}"));
            sink.note(&format!("residual: {residual:e}"));
            if let Some(o) = &oracle {
                sink.note(&format!("oracle max_abs_diff: {:e}", o.max_abs_diff));
                sink.note(&format!("oracle dense_residual: {:e}", o.dense_residual));
            }
        }
    }
    Ok(0)
}
