//! CSV output.
//!
//! Floats are written as `{:.16e}`, which round-trips every f64 exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::config::Scheme;
use crate::error::{HarnessError, Result};
use crate::experiments::{DecaySeries, RateRow, RateTable, SweepRow};

pub const RATE_HEADER: [&str; 6] = ["alpha", "theta", "scheme", "tau", "error", "rate"];

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad {what} field {field:?}")))
}

pub fn write_rate_table<W: Write>(out: W, table: &RateTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RATE_HEADER)?;
    for row in &table.rows {
        for ((tau, err), rate) in row.taus.iter().zip(&row.errors).zip(row.pair_rates()) {
            w.write_record([
                f(row.alpha),
                f(row.theta),
                row.scheme.to_string(),
                f(*tau),
                f(*err),
                rate.map(f).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rebuild rows from a file written by [`write_rate_table`]. Consecutive
/// records with the same (α, θ, scheme) form one row.
pub fn read_rate_table(path: &Path) -> Result<Vec<RateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows: Vec<RateRow> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != RATE_HEADER.len() {
            return Err(HarnessError::Config(format!("expected 6 columns, got {}", rec.len())));
        }
        let alpha = parse(&rec[0], "alpha")?;
        let theta = parse(&rec[1], "theta")?;
        let scheme: Scheme = rec[2].parse()?;
        let tau = parse(&rec[3], "tau")?;
        let error = parse(&rec[4], "error")?;
        match rows.last_mut() {
            Some(last) if last.alpha == alpha && last.theta == theta && last.scheme == scheme => {
                last.taus.push(tau);
                last.errors.push(error);
            }
            _ => rows.push(RateRow {
                alpha,
                theta,
                scheme,
                taus: vec![tau],
                errors: vec![error],
                rate: f64::NAN,
            }),
        }
    }
    for row in &mut rows {
        row.rate = crate::experiments::compute_rate(&row.errors)?;
    }
    Ok(rows)
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "theta", "tau", "error"])?;
    for r in rows {
        w.write_record([f(r.alpha), f(r.theta), f(r.tau), f(r.error)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_decay<W: Write>(out: W, series: &[DecaySeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "n", "abs_weight"])?;
    for s in series {
        for (n, m) in s.magnitudes.iter().enumerate() {
            w.write_record([f(s.theta), n.to_string(), f(*m)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fitted slopes, one line per θ; empty slope when no fit was possible.
pub fn write_decay_fit<W: Write>(out: W, series: &[DecaySeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "slope", "oracle_deviation"])?;
    for s in series {
        w.write_record([f(s.theta), s.slope.map(f).unwrap_or_default(), f(s.oracle_deviation)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_weights<W: Write>(out: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "weight"])?;
    for (n, v) in values.iter().enumerate() {
        w.write_record([n.to_string(), f(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}
