//! File formats: trajectory and estimate CSV, parameter JSON.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! write followed by a read reproduces every value exactly.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::run::FilterRun;
use crate::simulate::Trajectory;

/// Observations read from a trajectory CSV; `s` is present when the file has it.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationFile {
    pub x: Vec<f64>,
    pub s: Option<Vec<f64>>,
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Csv {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { .. } => Error::Csv {
            line,
            message: "invalid UTF-8".into(),
        },
        kind => Error::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn write_rows<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Header `t,s,x`, one row per step, `t` from 1.
pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let rows = traj
        .s
        .iter()
        .zip(&traj.x)
        .enumerate()
        .map(|(i, (s, x))| vec![(i + 1).to_string(), s.to_string(), x.to_string()]);
    write_rows(out, &["t", "s", "x"], rows)
}

/// Header `t,estimate,aux`.
pub fn write_estimates<W: Write>(out: W, run: &FilterRun) -> Result<()> {
    let rows = run
        .estimates
        .iter()
        .zip(&run.aux)
        .enumerate()
        .map(|(i, (e, a))| vec![(i + 1).to_string(), e.to_string(), a.to_string()]);
    write_rows(out, &["t", "estimate", "aux"], rows)
}

/// Reads a CSV with required columns `required` and optional ones `optional`.
/// Returns the columns in that order, `None` for absent optional columns.
/// Column `t` must run 1, 2, ..; every other value must be a finite number.
fn read_columns<R: Read>(
    input: R,
    required: &[&str],
    optional: &[&str],
) -> Result<Vec<Option<Vec<f64>>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("t").ok_or_else(|| Error::Csv {
        line: 1,
        message: "missing column `t`".into(),
    })?;
    let mut cols = Vec::new();
    for name in required {
        cols.push(Some(find(name).ok_or_else(|| Error::Csv {
            line: 1,
            message: format!("missing column `{name}`"),
        })?));
    }
    cols.extend(optional.iter().map(|name| find(name)));

    let mut data: Vec<Option<Vec<f64>>> = cols.iter().map(|c| c.map(|_| Vec::new())).collect();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(row as u64 + 2, |p| p.line());
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Csv {
                line,
                message: format!("missing field {}", idx + 1),
            })
        };
        let t = field(t_col)?;
        if t.parse::<usize>().ok() != Some(row + 1) {
            return Err(Error::Csv {
                line,
                message: format!("expected t = {}, found `{t}`", row + 1),
            });
        }
        for (col, out) in cols.iter().zip(data.iter_mut()) {
            if let (Some(idx), Some(out)) = (col, out) {
                let raw = field(*idx)?;
                let v: f64 = raw.parse().map_err(|_| Error::Csv {
                    line,
                    message: format!("`{raw}` in column `{}` is not a number", &headers[*idx]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Csv {
                        line,
                        message: format!("non-finite value `{raw}` in column `{}`", &headers[*idx]),
                    });
                }
                out.push(v);
            }
        }
    }
    Ok(data)
}

/// Reads `t,s,x` or `t,x`; extra columns are ignored.
pub fn read_observations<R: Read>(input: R) -> Result<ObservationFile> {
    let mut cols = read_columns(input, &["x"], &["s"])?.into_iter();
    let x = cols.next().flatten().unwrap_or_default();
    if x.is_empty() {
        return Err(Error::EmptyObservations);
    }
    Ok(ObservationFile {
        x,
        s: cols.next().flatten(),
    })
}

/// Reads `t,estimate,aux`; returns the two value columns.
pub fn read_estimates<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut cols = read_columns(input, &["estimate", "aux"], &[])?.into_iter();
    let est = cols.next().flatten().unwrap_or_default();
    let aux = cols.next().flatten().unwrap_or_default();
    Ok((est, aux))
}

pub fn read_params_json<R: Read>(input: R) -> Result<ModelParams> {
    serde_json::from_reader(input).map_err(|e| match e.classify() {
        serde_json::error::Category::Io => Error::Io(e.into()),
        serde_json::error::Category::Data => Error::Params(e.to_string()),
        _ => Error::Json(e.to_string()),
    })
}

pub fn write_params_json<W: Write>(mut out: W, params: &ModelParams) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, params).map_err(|e| Error::Json(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
