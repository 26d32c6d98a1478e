//! The convergence, robustness and weight-decay experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use fracshift_core::fem::{GridFunction, Mesh1D, Space};
use fracshift_core::mittag_leffler::ml_eval;
use fracshift_core::series::{self, oracle};
use fracshift_core::stepper::{self, InitialData, ProblemSpec, SchemeConfig, Source, Stepper, Trajectory};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, Reference, Scheme};
use crate::error::{HarnessError, Result};

/// Steps at which each run's discrete equation is re-checked.
pub const RESIDUAL_SAMPLES: usize = 10;

/// One (α, θ, scheme) line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub alpha: f64,
    pub theta: f64,
    pub scheme: Scheme,
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    /// log₂ ratio of the two finest errors.
    pub rate: f64,
}

impl RateRow {
    fn new(alpha: f64, theta: f64, scheme: Scheme, taus: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        let rate = compute_rate(&errors)?;
        Ok(Self { alpha, theta, scheme, taus, errors, rate })
    }

    /// Rate between each τ and the next coarser one; `None` for the coarsest.
    pub fn pair_rates(&self) -> Vec<Option<f64>> {
        (0..self.errors.len())
            .map(|k| (k > 0).then(|| (self.errors[k - 1] / self.errors[k]).log2()))
            .collect()
    }

    pub fn finest_error(&self) -> f64 {
        *self.errors.last().expect("rows hold at least two errors")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Largest relative residual of the discrete equation over all sampled steps.
    pub max_residual: f64,
}

impl RateTable {
    pub fn row(&self, alpha: f64, theta: f64, scheme: Scheme) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.theta == theta && r.scheme == scheme)
    }
}

/// `log₂(e_{K−1}/e_K)` from the two finest levels.
pub fn compute_rate(errors: &[f64]) -> Result<f64> {
    if errors.len() < 2 {
        return Err(HarnessError::Config(format!("need at least two errors, got {}", errors.len())));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(HarnessError::Config(format!("errors must be positive, got {e}")));
    }
    let k = errors.len() - 1;
    Ok((errors[k - 1] / errors[k]).log2())
}

/// Example 1(i): `f = 0`, `v = sin x` on `(0, π)`.
pub fn example1_smooth(alpha: f64) -> ProblemSpec {
    ProblemSpec {
        a: 0.0,
        b: PI,
        t_final: 1.0,
        alpha,
        initial: InitialData::Smooth { v: Arc::new(f64::sin), dv: Arc::new(f64::cos) },
        source: Source::Zero,
    }
}

/// Example 1(ii): `f = 0`, `v = χ_(0,1/2)` on `(0, 1)`.
pub fn example1_indicator(alpha: f64) -> ProblemSpec {
    ProblemSpec {
        a: 0.0,
        b: 1.0,
        t_final: 1.0,
        alpha,
        initial: InitialData::Indicator { c: 0.0, d: 0.5 },
        source: Source::Zero,
    }
}

/// Example 2: `u = (E_α(−t^α) + t³) sin x` on `(0, π)`, with the matching source.
pub fn example2(alpha: f64) -> ProblemSpec {
    let g = libm::tgamma(4.0 - alpha);
    ProblemSpec {
        a: 0.0,
        b: PI,
        t_final: 1.0,
        alpha,
        initial: InitialData::Smooth { v: Arc::new(f64::sin), dv: Arc::new(f64::cos) },
        source: Source::Field(Arc::new(move |x: f64, t: f64| {
            (6.0 * t.powf(3.0 - alpha) / g + t * t * t) * x.sin()
        })),
    }
}

pub fn example1_exact(alpha: f64, t: f64) -> Result<impl Fn(f64) -> f64> {
    let e = ml_eval(alpha, -t.powf(alpha))?;
    Ok(move |x: f64| e * x.sin())
}

pub fn example2_exact(alpha: f64, t: f64) -> Result<impl Fn(f64) -> f64> {
    let e = ml_eval(alpha, -t.powf(alpha))? + t * t * t;
    Ok(move |x: f64| e * x.sin())
}

pub fn space_for(problem: &ProblemSpec, m: usize) -> Result<Space> {
    Ok(Space::new(Mesh1D::new(problem.a, problem.b, m)?)?)
}

/// A finished run plus its worst sampled residual.
pub struct Run {
    pub config: SchemeConfig,
    pub trajectory: Trajectory,
    pub residual: f64,
}

/// Solve to `steps·tau` and re-check the discrete equation at
/// [`RESIDUAL_SAMPLES`] randomly chosen steps.
pub fn run_scheme(
    problem: &ProblemSpec,
    space: &Space,
    theta: f64,
    tau: f64,
    steps: usize,
    scheme: Scheme,
    seed: u64,
) -> Result<Run> {
    let config = SchemeConfig::new(problem.alpha, theta, tau, steps, scheme.corrected())?;
    let trajectory = stepper::solve(&config, problem, space)?;
    let residual = sampled_residual(&config, problem, space, &trajectory, seed)?;
    Ok(Run { config, trajectory, residual })
}

pub fn sampled_residual(
    config: &SchemeConfig,
    problem: &ProblemSpec,
    space: &Space,
    traj: &Trajectory,
    seed: u64,
) -> Result<f64> {
    let last = traj.last();
    if last == 0 {
        return Ok(0.0);
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut st = Stepper::new(config, problem, space)?;
    let mut worst: f64 = 0.0;
    for _ in 0..RESIDUAL_SAMPLES.min(last) {
        let n = rng.gen_range(1..=last);
        worst = worst.max(st.residual(&traj.w, n)?);
    }
    // the corrected first step always gets checked
    Ok(worst.max(st.residual(&traj.w, 1)?))
}

/// `E_α(−λ_h t^α)·v_h`, the spatially discrete solution when `v_h` satisfies
/// `A v_h = λ_h M v_h` and `f = 0`.
pub fn semidiscrete_solution(space: &Space, v_h: &GridFunction, alpha: f64, t: f64) -> Result<GridFunction> {
    let av = space.stiffness.apply(v_h);
    let mv = space.mass.apply(v_h);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let lambda = dot(&av, v_h) / dot(&mv, v_h);
    let defect = av.iter().zip(mv.iter()).map(|(a, m)| (a - lambda * m).abs()).fold(0.0, f64::max);
    if defect > 1e-10 * av.max_abs() {
        return Err(HarnessError::Config(
            "semidiscrete reference needs initial data that is a discrete eigenfunction".into(),
        ));
    }
    let e = ml_eval(alpha, -lambda * t.powf(alpha))?;
    Ok(GridFunction(v_h.iter().map(|v| e * v).collect()))
}

fn difference_norm(space: &Space, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    stepper::l2_norm(space, &d)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))
}

fn seed(cell: usize, scheme: Scheme, level: usize) -> u64 {
    ((cell as u64) << 16) ^ ((scheme as u64) << 8) ^ level as u64
}

fn sort_rows(rows: &mut [RateRow]) {
    rows.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then(a.theta.total_cmp(&b.theta))
            .then(a.scheme.cmp(&b.scheme))
    });
}

fn collect(results: Vec<Result<(RateRow, f64)>>) -> Result<RateTable> {
    let mut rows = Vec::with_capacity(results.len());
    let mut max_residual: f64 = 0.0;
    for r in results {
        let (row, res) = r?;
        rows.push(row);
        max_residual = max_residual.max(res);
    }
    sort_rows(&mut rows);
    Ok(RateTable { rows, max_residual })
}

fn expect_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    if kinds.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("config for {:?} passed to the wrong experiment", cfg.kind)))
    }
}

/// Smooth data `v = sin x`: errors at `t_eval` against the semi-discrete or
/// the continuous closed-form solution.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<RateTable> {
    expect_kind(cfg, &[ExperimentKind::Table1, ExperimentKind::Custom])?;
    if !matches!(cfg.reference, Reference::Semidiscrete | Reference::Exact) {
        return Err(HarnessError::Config("table1 compares against `semidiscrete` or `exact`".into()));
    }
    let jobs: Vec<(usize, f64, f64, Scheme)> = cfg
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, t))| cfg.schemes.iter().map(move |&s| (i, a, t, s)))
        .collect();
    let space = space_for(&example1_smooth(0.5), cfg.m)?;
    let results = pool(cfg.threads)?.install(|| {
        jobs.par_iter()
            .map(|&(cell, alpha, theta, scheme)| {
                let problem = example1_smooth(alpha);
                let mut errors = Vec::with_capacity(cfg.taus.len());
                let mut residual: f64 = 0.0;
                for (level, &tau) in cfg.taus.iter().enumerate() {
                    let steps = cfg.steps_to_eval(tau);
                    let run = run_scheme(&problem, &space, theta, tau, steps, scheme, seed(cell, scheme, level))?;
                    residual = residual.max(run.residual);
                    let u = run.trajectory.u(steps);
                    let err = match cfg.reference {
                        Reference::Semidiscrete => {
                            let uh = semidiscrete_solution(&space, &run.trajectory.v_h, alpha, cfg.t_eval)?;
                            difference_norm(&space, &u, &uh)
                        }
                        _ => stepper::l2_error(&space.mesh, &u, example1_exact(alpha, cfg.t_eval)?),
                    };
                    errors.push(err);
                }
                Ok((RateRow::new(alpha, theta, scheme, cfg.taus.clone(), errors)?, residual))
            })
            .collect::<Vec<_>>()
    });
    collect(results)
}

/// Indicator data: errors at `t_eval` against a fine-step reference run.
pub fn run_table2(cfg: &ExperimentConfig) -> Result<RateTable> {
    expect_kind(cfg, &[ExperimentKind::Table2, ExperimentKind::Custom])?;
    if !matches!(cfg.reference, Reference::Corrected | Reference::SameScheme) {
        return Err(HarnessError::Config("table2 compares against `corrected` or `same-scheme`".into()));
    }
    let space = space_for(&example1_indicator(0.5), cfg.m)?;
    let ref_steps = cfg.steps_to_eval(cfg.tau_ref);
    let results: Vec<Result<Vec<(RateRow, f64)>>> = pool(cfg.threads)?.install(|| {
        cfg.cells
            .par_iter()
            .enumerate()
            .map(|(cell, &(alpha, theta))| {
                let problem = example1_indicator(alpha);
                let reference = |scheme: Scheme| -> Result<(GridFunction, f64)> {
                    let run = run_scheme(&problem, &space, theta, cfg.tau_ref, ref_steps, scheme, seed(cell, scheme, 99))?;
                    Ok((run.trajectory.u(ref_steps), run.residual))
                };
                let shared = match cfg.reference {
                    Reference::Corrected => Some(reference(Scheme::Corrected)?),
                    _ => None,
                };
                let mut out = Vec::new();
                for &scheme in &cfg.schemes {
                    let (u_ref, mut residual) = match &shared {
                        Some(r) => r.clone(),
                        None => reference(scheme)?,
                    };
                    let mut errors = Vec::with_capacity(cfg.taus.len());
                    for (level, &tau) in cfg.taus.iter().enumerate() {
                        let steps = cfg.steps_to_eval(tau);
                        let run = run_scheme(&problem, &space, theta, tau, steps, scheme, seed(cell, scheme, level))?;
                        residual = residual.max(run.residual);
                        errors.push(difference_norm(&space, &run.trajectory.u(steps), &u_ref));
                    }
                    out.push((RateRow::new(alpha, theta, scheme, cfg.taus.clone(), errors)?, residual));
                }
                Ok(out)
            })
            .collect()
    });
    let mut flat = Vec::new();
    for r in results {
        flat.extend(r?.into_iter().map(Ok));
    }
    collect(flat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub theta: f64,
    pub tau: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub max_residual: f64,
}

/// Example 2 with the corrected scheme: error at `t_eval` for each (α, θ)
/// cell and each τ.
pub fn run_alpha_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    expect_kind(cfg, &[ExperimentKind::AlphaSweep, ExperimentKind::Custom])?;
    let space = space_for(&example2(0.5), cfg.m)?;
    let scheme = cfg.schemes.first().copied().unwrap_or(Scheme::Corrected);
    let jobs: Vec<(usize, f64, f64, usize, f64)> = cfg
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, t))| cfg.taus.iter().enumerate().map(move |(l, &tau)| (i, a, t, l, tau)))
        .collect();
    let results: Vec<Result<(SweepRow, f64)>> = pool(cfg.threads)?.install(|| {
        jobs.par_iter()
            .map(|&(cell, alpha, theta, level, tau)| {
                let problem = example2(alpha);
                let steps = cfg.steps_to_eval(tau);
                let run = run_scheme(&problem, &space, theta, tau, steps, scheme, seed(cell, scheme, level))?;
                let u = run.trajectory.u(steps);
                let error = stepper::l2_error(&space.mesh, &u, example2_exact(alpha, cfg.t_eval)?);
                if !error.is_finite() || u.iter().any(|v| !v.is_finite()) {
                    return Err(HarnessError::Numerical(fracshift_core::Error::InvalidParameter {
                        name: "solution",
                        value: error,
                    }));
                }
                Ok((SweepRow { alpha, theta, tau, error }, run.residual))
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut max_residual: f64 = 0.0;
    for r in results {
        let (row, res) = r?;
        rows.push(row);
        max_residual = max_residual.max(res);
    }
    rows.sort_by(|a, b| {
        a.theta
            .total_cmp(&b.theta)
            .then(b.alpha.total_cmp(&a.alpha))
            .then(b.tau.total_cmp(&a.tau))
    });
    Ok(SweepResult { rows, max_residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub theta: f64,
    /// `|θ_n|`, n = 0..len
    pub magnitudes: Vec<f64>,
    /// Least-squares slope of `ln|θ_n|` against n over `n ∈ [5, 60]`; `None`
    /// when fewer than two nonzero weights fall in that window.
    pub slope: Option<f64>,
    /// Largest `|θ_n − oracle_n|` against the series log/exp route.
    pub oracle_deviation: f64,
}

pub const DECAY_FIT_WINDOW: (usize, usize) = (5, 60);

pub fn fit_log_slope(magnitudes: &[f64], window: (usize, usize)) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (window.0..=window.1.min(magnitudes.len().saturating_sub(1)))
        .filter(|&n| magnitudes[n] > 0.0)
        .map(|n| (n as f64, magnitudes[n].ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Shift-weight magnitudes `|θ_n|` for each configured θ.
pub fn run_weight_decay(cfg: &ExperimentConfig) -> Result<Vec<DecaySeries>> {
    let delta = series::bdf2();
    let n = cfg.decay_len.max(1) - 1;
    let mut out: Vec<DecaySeries> = cfg
        .thetas
        .iter()
        .map(|&theta| {
            let w = series::shift_weights(&delta, theta, n)?;
            let o = oracle::series_oracle(&series::Polynomial::constant(1.0), &delta, 0.0, theta, n)?;
            let oracle_deviation =
                w.values.iter().zip(&o.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let magnitudes: Vec<f64> = w.values.iter().map(|v| v.abs()).collect();
            Ok(DecaySeries {
                theta,
                slope: fit_log_slope(&magnitudes, DECAY_FIT_WINDOW),
                magnitudes,
                oracle_deviation,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(out)
}
