//! Pass/fail thresholds applied by `--check`.

use crate::config::Scheme;
use crate::experiments::{DecaySeries, RateTable, SweepResult};

pub const CORRECTED_RATE: (f64, f64) = (1.8, 2.2);
pub const STANDARD_RATE: (f64, f64) = (0.85, 1.2);
pub const MAX_RESIDUAL: f64 = 1e-11;
/// Largest tolerated max/min error ratio across α at fixed θ and τ.
pub const ALPHA_SPREAD: f64 = 10.0;
/// θ values the α-spread bound is asserted for.
pub const ROBUST_THETAS: [f64; 2] = [0.1, 0.4];
pub const DECAY_SLOPE: f64 = -0.3;
pub const DECAY_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation(pub String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn residual(max: f64, out: &mut Vec<Violation>) {
    if !(max <= MAX_RESIDUAL) {
        out.push(Violation(format!("residual {max:e} above {MAX_RESIDUAL:e}")));
    }
}

/// Corrected rows must be second order. Standard rows must be first order
/// unless θ = −1/2, where the two schemes coincide.
pub fn check_rates(table: &RateTable) -> Vec<Violation> {
    let mut out = Vec::new();
    for r in &table.rows {
        let band = match r.scheme {
            Scheme::Corrected => CORRECTED_RATE,
            Scheme::Standard if r.theta == -0.5 => CORRECTED_RATE,
            Scheme::Standard => STANDARD_RATE,
        };
        if !(r.rate >= band.0 && r.rate <= band.1) {
            out.push(Violation(format!(
                "α={} θ={} {}: rate {:.3} outside [{}, {}]",
                r.alpha, r.theta, r.scheme, r.rate, band.0, band.1
            )));
        }
    }
    residual(table.max_residual, &mut out);
    out
}

pub fn check_sweep(sweep: &SweepResult) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut keys: Vec<(f64, f64)> = sweep
        .rows
        .iter()
        .filter(|r| ROBUST_THETAS.contains(&r.theta))
        .map(|r| (r.theta, r.tau))
        .collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    for (theta, tau) in keys {
        let errs: Vec<f64> = sweep.rows.iter().filter(|r| r.theta == theta && r.tau == tau).map(|r| r.error).collect();
        let max = errs.iter().copied().fold(0.0, f64::max);
        let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max / min < ALPHA_SPREAD) {
            out.push(Violation(format!("θ={theta} τ={tau}: error spread {:.2} across α", max / min)));
        }
    }
    residual(sweep.max_residual, &mut out);
    out
}

/// θ = 0 has a single nonzero weight and is skipped.
pub fn check_decay(series: &[DecaySeries]) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in series.iter().filter(|s| s.theta != 0.0) {
        match s.slope {
            Some(k) if k < DECAY_SLOPE => {}
            k => out.push(Violation(format!("θ={}: decay slope {k:?} not below {DECAY_SLOPE}", s.theta))),
        }
        if let Some(&tail) = s.magnitudes.get(60) {
            if !(tail < DECAY_TAIL) {
                out.push(Violation(format!("θ={}: |θ_60| = {tail:e}", s.theta)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{RateRow, SweepRow};

    fn row(theta: f64, scheme: Scheme, rate: f64) -> RateRow {
        RateRow { alpha: 0.5, theta, scheme, taus: vec![], errors: vec![], rate }
    }

    #[test]
    fn rate_bands() {
        let t = RateTable {
            rows: vec![
                row(0.0, Scheme::Corrected, 2.0),
                row(0.0, Scheme::Standard, 1.0),
                row(-0.5, Scheme::Standard, 2.0),
            ],
            max_residual: 1e-13,
        };
        assert!(check_rates(&t).is_empty());
        let t = RateTable {
            rows: vec![row(0.0, Scheme::Corrected, 1.0), row(-0.5, Scheme::Standard, 1.0)],
            max_residual: 1e-9,
        };
        assert_eq!(check_rates(&t).len(), 3);
    }

    #[test]
    fn sweep_spread() {
        let r = |alpha, error| SweepRow { alpha, theta: 0.1, tau: 0.01, error };
        let ok = SweepResult { rows: vec![r(0.5, 1e-5), r(0.001, 4e-5)], max_residual: 0.0 };
        assert!(check_sweep(&ok).is_empty());
        let bad = SweepResult { rows: vec![r(0.5, 1e-5), r(0.001, 4e-4)], max_residual: 0.0 };
        assert_eq!(check_sweep(&bad).len(), 1);
        let mut other = bad.clone();
        other.rows.iter_mut().for_each(|r| r.theta = 0.8);
        assert!(check_sweep(&other).is_empty());
    }
}
