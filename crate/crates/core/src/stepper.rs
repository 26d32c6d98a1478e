//! Fully discrete θ-schemes for `∂_t^α u − Δu = f`.
//!
//! With `w = u − v` and `g = f − f(0)` the unknowns `W^n ≈ w(t_n)` satisfy, for
//! `n ≥ 1`,
//!
//! ```text
//! τ^{−α} Σ_{j=0}^{n} ω_j W^{n−j} − Δ_h Σ_{j=0}^{n} θ_j W^{n−j}
//!     = Σ_{j=0}^{n} θ_j g_h^{n−j} + c_n (f_h^0 + Δ_h v_h),       W^0 = 0,
//! ```
//!
//! where `ω_j` are the coefficients of `δ(ζ)^α e^{θδ(ζ)}`, `θ_j` those of
//! `e^{θδ(ζ)}`, and `δ` is the BDF2 polynomial. The standard scheme uses
//! `c_n = 1`; the corrected scheme uses `c_1 = θ + 3/2` and `c_n = 1` for
//! `n ≥ 2`. Both coincide at `θ = −1/2`.
//!
//! In weak form `Δ_h` never appears explicitly: the mass matrix multiplies the
//! time terms, the stiffness matrix replaces `−Δ_h`, and `M·Δ_h v_h = −A v_h`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{self, GridFunction, Mesh1D, Space, TridiagonalFactor};
use crate::series::{self, WeightSequence};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum InitialData {
    Zero,
    /// `v ∈ D(Δ)`; discretized by the Ritz projection, which needs `v′`.
    Smooth { v: ScalarFn, dv: ScalarFn },
    /// Indicator of `(c, d)`; discretized by the L² projection.
    Indicator { c: f64, d: f64 },
}

#[derive(Clone)]
pub enum Source {
    Zero,
    /// `f(x, t)`
    Field(FieldFn),
}

impl Source {
    fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Field(f) => f(x, t),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
    pub alpha: f64,
    pub initial: InitialData,
    pub source: Source,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter { name: "alpha", value: self.alpha });
        }
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidParameter { name: "T", value: self.t_final });
        }
        Ok(())
    }
}

/// Time-stepping parameters plus the two weight sequences they determine.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub alpha: f64,
    pub theta: f64,
    pub tau: f64,
    pub steps: usize,
    pub corrected: bool,
    pub omega: WeightSequence,
    pub shift: WeightSequence,
    /// Skip shift weights with `|θ_j|` below this; `None` uses every weight.
    pub shift_cutoff: Option<f64>,
}

impl SchemeConfig {
    /// Weights from `P = Q = δ_BDF2` for `steps` steps of size `tau`.
    pub fn new(alpha: f64, theta: f64, tau: f64, steps: usize, corrected: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter { name: "alpha", value: alpha });
        }
        if !(theta > -1.0 && theta < 1.0) {
            return Err(Error::InvalidParameter { name: "theta", value: theta });
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter { name: "tau", value: tau });
        }
        let delta = series::bdf2();
        Ok(Self {
            alpha,
            theta,
            tau,
            steps,
            corrected,
            omega: series::omega_weights(&delta, &delta, alpha, theta, steps)?,
            shift: series::shift_weights(&delta, theta, steps)?,
            shift_cutoff: None,
        })
    }

    pub fn with_shift_cutoff(mut self, cutoff: Option<f64>) -> Self {
        self.shift_cutoff = cutoff;
        self
    }

    /// Factor multiplying `f_h^0 + Δ_h v_h` at step `n`.
    pub fn constant_factor(&self, n: usize) -> f64 {
        if self.corrected && n == 1 {
            self.theta + 1.5
        } else {
            1.0
        }
    }

    fn shift_used(&self, j: usize) -> bool {
        match self.shift_cutoff {
            Some(c) => libm::fabs(self.shift.values[j]) >= c,
            None => true,
        }
    }
}

/// `W^0..W^n` and the discrete initial datum `v_h`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub w: Vec<GridFunction>,
    pub v_h: GridFunction,
    pub tau: f64,
}

impl Trajectory {
    pub fn new(v_h: GridFunction, tau: f64) -> Self {
        let zero = GridFunction::zeros(v_h.len());
        Self { w: alloc::vec![zero], v_h, tau }
    }

    /// Index of the last computed level.
    pub fn last(&self) -> usize {
        self.w.len() - 1
    }

    /// `U^n = W^n + v_h`
    pub fn u(&self, n: usize) -> GridFunction {
        let mut u = self.w[n].clone();
        u.axpy(1.0, &self.v_h);
        u
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

fn check_history(history: &[GridFunction], weights: &WeightSequence, n: usize) -> Result<()> {
    if history.len() < n + 1 {
        return Err(Error::MissingHistory { step: n, have: history.len(), need: n + 1 });
    }
    if weights.len() < n + 1 {
        return Err(Error::MissingHistory { step: n, have: weights.len(), need: n + 1 });
    }
    Ok(())
}

/// `Σ_{j=from}^{n} c_j φ^{n−j}`
fn convolve(coeffs: &[f64], history: &[GridFunction], n: usize, from: usize, skip: impl Fn(usize) -> bool) -> GridFunction {
    let mut out = GridFunction::zeros(history[0].len());
    for j in from..=n {
        if !skip(j) {
            out.axpy(coeffs[j], &history[n - j]);
        }
    }
    out
}

/// `φ^{n−θ} = Σ_{j=0}^{n} θ_j φ^{n−j}`
pub fn discrete_shift(shift: &WeightSequence, history: &[GridFunction], n: usize) -> Result<GridFunction> {
    check_history(history, shift, n)?;
    Ok(convolve(&shift.values, history, n, 0, |_| false))
}

/// `D_τ^{α,n−θ} φ = τ^{−α} Σ_{j=0}^{n} ω_j φ^{n−j}`
pub fn discrete_frac_derivative(
    omega: &WeightSequence,
    tau: f64,
    alpha: f64,
    history: &[GridFunction],
    n: usize,
) -> Result<GridFunction> {
    check_history(history, omega, n)?;
    let mut out = convolve(&omega.values, history, n, 0, |_| false);
    let scale = libm::pow(tau, -alpha);
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Discrete initial datum: Ritz projection for smooth data, L² projection for
/// indicators.
pub fn discrete_initial(space: &Space, initial: &InitialData) -> Result<GridFunction> {
    match initial {
        InitialData::Zero => Ok(GridFunction::zeros(space.m())),
        InitialData::Smooth { dv, .. } => fem::ritz_project(space, |x| dv(x)),
        InitialData::Indicator { c, d } => fem::l2_project_indicator(space, *c, *d),
    }
}

/// Per-solve state: factored left-hand side, the constant block and the
/// source loads `M g_h^k`.
pub struct Stepper<'a> {
    config: &'a SchemeConfig,
    problem: &'a ProblemSpec,
    space: &'a Space,
    scale: f64,
    lhs: TridiagonalFactor,
    /// `M f_h^0 − A v_h`
    constant: GridFunction,
    /// `load(f(t_0))`
    load0: GridFunction,
    /// `M g_h^k`, `k = 0..`
    source: Vec<GridFunction>,
    v_h: GridFunction,
}

impl<'a> Stepper<'a> {
    pub fn new(config: &'a SchemeConfig, problem: &'a ProblemSpec, space: &'a Space) -> Result<Self> {
        problem.validate()?;
        if config.alpha != problem.alpha {
            return Err(Error::InvalidParameter { name: "alpha", value: config.alpha });
        }
        let m = space.m();
        let scale = libm::pow(config.tau, -config.alpha);
        let lhs = space
            .mass
            .combine(scale * config.omega.values[0], &space.stiffness, config.shift.values[0])
            .factor()?;
        let v_h = discrete_initial(space, &problem.initial)?;
        let load0 = match problem.source {
            Source::Zero => GridFunction::zeros(m),
            _ => fem::load_vector(&space.mesh, |x| problem.source.eval(x, 0.0)),
        };
        let mut constant = space.stiffness.apply(&v_h);
        constant.iter_mut().zip(load0.iter()).for_each(|(c, l)| *c = l - *c);
        Ok(Self {
            config,
            problem,
            space,
            scale,
            lhs,
            constant,
            load0,
            source: alloc::vec![GridFunction::zeros(m)],
            v_h,
        })
    }

    pub fn v_h(&self) -> &GridFunction {
        &self.v_h
    }

    /// `M g_h^k` for `k = 0..=n`.
    fn source_loads(&mut self, n: usize) -> &[GridFunction] {
        while self.source.len() <= n {
            let k = self.source.len();
            let g = match self.problem.source {
                Source::Zero => GridFunction::zeros(self.space.m()),
                _ => {
                    let t = k as f64 * self.config.tau;
                    let mut g = fem::load_vector(&self.space.mesh, |x| self.problem.source.eval(x, t));
                    g.axpy(-1.0, &self.load0);
                    g
                }
            };
            self.source.push(g);
        }
        &self.source[..=n]
    }

    /// Right-hand side of the step-`n` system.
    pub fn rhs(&mut self, history: &[GridFunction], n: usize) -> Result<GridFunction> {
        if n == 0 {
            return Err(Error::InvalidStep);
        }
        let cfg = self.config;
        check_history(history, &cfg.omega, n - 1)?;
        if cfg.omega.len() < n + 1 || cfg.shift.len() < n + 1 {
            return Err(Error::MissingHistory { step: n, have: cfg.omega.len(), need: n + 1 });
        }
        let space = self.space;

        let memory = convolve(&cfg.omega.values, history, n, 1, |_| false);
        let shifted = convolve(&cfg.shift.values, history, n, 1, |j| !cfg.shift_used(j));
        let mut rhs = space.mass.apply(&memory);
        rhs.iter_mut().for_each(|r| *r *= -self.scale);
        rhs.axpy(-1.0, &space.stiffness.apply(&shifted));

        let c_n = cfg.constant_factor(n);
        rhs.axpy(c_n, &self.constant);

        if !matches!(self.problem.source, Source::Zero) {
            let loads = self.source_loads(n);
            let g = convolve(&cfg.shift.values, loads, n, 0, |j| !cfg.shift_used(j));
            rhs.axpy(1.0, &g);
        }
        Ok(rhs)
    }

    /// Compute `W^n` from `history = W^0..W^{n−1}`.
    pub fn step(&mut self, history: &[GridFunction], n: usize) -> Result<GridFunction> {
        let mut rhs = self.rhs(history, n)?;
        self.lhs.solve_in_place(&mut rhs)?;
        Ok(rhs)
    }

    /// Relative residual of the step-`n` equation evaluated on `history`
    /// (which must contain `W^0..W^n`), using the full sums including `j = 0`.
    ///
    /// The max-norm of the residual is divided by the max-norm of the same
    /// expression with every matrix, weight and vector replaced by its absolute
    /// value, so rounding in the cancelling sums gives O(ε) rather than
    /// O(ε/h²).
    pub fn residual(&mut self, history: &[GridFunction], n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidStep);
        }
        let cfg = self.config;
        check_history(history, &cfg.omega, n)?;
        let space = self.space;
        let used = |j: usize| cfg.shift_used(j);
        let deriv = discrete_frac_derivative(&cfg.omega, cfg.tau, cfg.alpha, history, n)?;
        let shifted = convolve(&cfg.shift.values, history, n, 0, |j| !used(j));
        let time_term = space.mass.apply(&deriv);
        let space_term = space.stiffness.apply(&shifted);

        let c_n = cfg.constant_factor(n);
        let mut data = GridFunction::zeros(space.m());
        data.axpy(c_n, &self.constant);
        let (abs_mass, abs_stiff) = (space.mass.abs(), space.stiffness.abs());
        let mut scale = abs_mass.apply(&abs_convolve(&cfg.omega.values, history, n, |_| true));
        scale.iter_mut().for_each(|s| *s *= self.scale);
        scale.axpy(1.0, &abs_stiff.apply(&abs_convolve(&cfg.shift.values, history, n, used)));
        let abs_v: Vec<f64> = self.v_h.iter().map(|v| libm::fabs(*v)).collect();
        let mut abs_data = abs_stiff.apply(&abs_v);
        abs_data.iter_mut().zip(self.load0.iter()).for_each(|(d, l)| *d = libm::fabs(c_n) * (*d + libm::fabs(*l)));
        if !matches!(self.problem.source, Source::Zero) {
            let loads = self.source_loads(n);
            data.axpy(1.0, &convolve(&cfg.shift.values, loads, n, 0, |j| !used(j)));
            abs_data.axpy(1.0, &abs_convolve(&cfg.shift.values, loads, n, used));
        }
        scale.axpy(1.0, &abs_data);

        let mut res: f64 = 0.0;
        for i in 0..space.m() {
            res = res.max(libm::fabs(time_term[i] + space_term[i] - data[i]));
        }
        let scale = scale.max_abs();
        Ok(if scale == 0.0 { res } else { res / scale })
    }
}

fn abs_convolve(coeffs: &[f64], history: &[GridFunction], n: usize, used: impl Fn(usize) -> bool) -> GridFunction {
    let mut out = GridFunction::zeros(history[0].len());
    for j in (0..=n).filter(|&j| used(j)) {
        let c = libm::fabs(coeffs[j]);
        out.iter_mut().zip(history[n - j].iter()).for_each(|(o, h)| *o += c * libm::fabs(*h));
    }
    out
}

/// One step of the scheme: `W^n` from `W^0..W^{n−1}` in `state`.
pub fn step(
    config: &SchemeConfig,
    problem: &ProblemSpec,
    space: &Space,
    state: &Trajectory,
    n: usize,
) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::InvalidStep);
    }
    if state.w.len() < n {
        return Err(Error::MissingHistory { step: n, have: state.w.len(), need: n });
    }
    Stepper::new(config, problem, space)?.step(&state.w[..n], n)
}

/// Run `config.steps` steps.
pub fn solve(config: &SchemeConfig, problem: &ProblemSpec, space: &Space) -> Result<Trajectory> {
    let mut stepper = Stepper::new(config, problem, space)?;
    let mut traj = Trajectory::new(stepper.v_h().clone(), config.tau);
    traj.w.reserve(config.steps);
    for n in 1..=config.steps {
        let w = stepper.step(&traj.w, n)?;
        traj.w.push(w);
    }
    Ok(traj)
}

/// Relative residual of the discrete equation at step `n` of a computed trajectory.
pub fn residual(
    config: &SchemeConfig,
    problem: &ProblemSpec,
    space: &Space,
    traj: &Trajectory,
    n: usize,
) -> Result<f64> {
    Stepper::new(config, problem, space)?.residual(&traj.w, n)
}

/// `‖U − exact‖_{L²(a,b)}` with `U` piecewise linear, 4-point Gauss per element.
pub fn l2_error(mesh: &Mesh1D, u: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for e in 0..mesh.elements() {
        for (x, w) in mesh.quadrature(e) {
            let d = u.eval_in_element(mesh, e, x) - exact(x);
            sum += w * d * d;
        }
    }
    libm::sqrt(sum)
}

/// `‖e‖_{L²}` of a P1 function, `sqrt(eᵀ M e)`.
pub fn l2_norm(space: &Space, e: &[f64]) -> f64 {
    let me = space.mass.apply(e);
    libm::sqrt(me.iter().zip(e).map(|(a, b)| a * b).sum::<f64>().max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mittag_leffler::ml_eval;
    use crate::series::bdf2;
    use alloc::vec;
    use core::f64::consts::PI;

    fn sine_problem(alpha: f64) -> ProblemSpec {
        ProblemSpec {
            a: 0.0,
            b: PI,
            t_final: 1.0,
            alpha,
            initial: InitialData::Smooth { v: Arc::new(libm::sin), dv: Arc::new(libm::cos) },
            source: Source::Zero,
        }
    }

    #[test]
    fn shift_with_zero_theta_is_identity() {
        let s = series::shift_weights(&bdf2(), 0.0, 3).unwrap();
        let hist: Vec<GridFunction> = (0..4).map(|k| vec![k as f64, 2.0 * k as f64].into()).collect();
        assert_eq!(discrete_shift(&s, &hist, 3).unwrap().0, vec![3.0, 6.0]);
    }

    #[test]
    fn shift_of_constant_history() {
        let s = series::shift_weights(&bdf2(), 0.7, 5).unwrap();
        let hist = vec![GridFunction::from(vec![2.0]); 6];
        let sum: f64 = s.values.iter().sum();
        let got = discrete_shift(&s, &hist, 5).unwrap();
        assert!((got[0] - 2.0 * sum).abs() < 1e-14);
    }

    #[test]
    fn shift_one_step_with_theta_one() {
        let s = series::shift_weights(&bdf2(), 1.0, 1).unwrap();
        let hist: Vec<GridFunction> = vec![vec![3.0].into(), vec![5.0].into()];
        let want = 4.4816890703380648 * 5.0 - 8.9633781406761296 * 3.0;
        assert!((discrete_shift(&s, &hist, 1).unwrap()[0] - want).abs() < 1e-13);
        assert!(matches!(discrete_shift(&s, &hist[..1], 1), Err(Error::MissingHistory { .. })));
    }

    #[test]
    fn frac_derivative_basics() {
        let d = bdf2();
        let omega = series::omega_weights(&d, &d, 0.5, 0.2, 6).unwrap();
        let zeros = vec![GridFunction::zeros(3); 7];
        assert!(discrete_frac_derivative(&omega, 0.1, 0.5, &zeros, 6).unwrap().iter().all(|&v| v == 0.0));
        let mut spike = zeros.clone();
        spike[0] = vec![1.0, 2.0, 3.0].into();
        let got = discrete_frac_derivative(&omega, 0.1, 0.5, &spike, 6).unwrap();
        let s = 0.1f64.powf(-0.5) * omega.values[6];
        for (k, g) in got.iter().enumerate() {
            assert!((g - s * (k + 1) as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn bdf2_differentiates_linear_function() {
        // α = 1, θ = 0: ω = δ, so τ^{-1} Σ ω_j t_{n−j} = 1 once n ≥ 2
        let d = bdf2();
        let omega = series::omega_weights(&d, &d, 1.0, 0.0, 64).unwrap();
        for tau in [0.1, 0.05, 0.025] {
            let n = (1.0 / tau) as usize;
            let hist: Vec<GridFunction> = (0..=n).map(|k| vec![k as f64 * tau].into()).collect();
            let got = discrete_frac_derivative(&omega, tau, 1.0, &hist, n).unwrap();
            assert!((got[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let space = Space::new(Mesh1D::new(0.0, 1.0, 15).unwrap()).unwrap();
        let problem = ProblemSpec {
            a: 0.0,
            b: 1.0,
            t_final: 1.0,
            alpha: 0.4,
            initial: InitialData::Zero,
            source: Source::Zero,
        };
        let cfg = SchemeConfig::new(0.4, 0.3, 0.1, 10, true).unwrap();
        let traj = solve(&cfg, &problem, &space).unwrap();
        assert_eq!(traj.w.len(), 11);
        assert!(traj.w.iter().all(|w| w.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn theta_minus_half_schemes_coincide() {
        let space = Space::new(Mesh1D::new(0.0, PI, 31).unwrap()).unwrap();
        let problem = sine_problem(0.3);
        let a = solve(&SchemeConfig::new(0.3, -0.5, 1.0 / 16.0, 16, true).unwrap(), &problem, &space).unwrap();
        let b = solve(&SchemeConfig::new(0.3, -0.5, 1.0 / 16.0, 16, false).unwrap(), &problem, &space).unwrap();
        assert_eq!(a.w, b.w);
    }

    #[test]
    fn scalar_first_step_residual() {
        // M = 1: the system is scalar, so the n = 1 equation can be checked by hand
        let space = Space::new(Mesh1D::new(0.0, PI, 1).unwrap()).unwrap();
        let problem = sine_problem(0.6);
        let cfg = SchemeConfig::new(0.6, 0.25, 0.1, 1, true).unwrap();
        let traj = solve(&cfg, &problem, &space).unwrap();
        assert_eq!(traj.w.len(), 2);
        let (m, a) = (space.mass.diag[0], space.stiffness.diag[0]);
        let w1 = traj.w[1][0];
        let v = traj.v_h[0];
        let lhs = 0.1f64.powf(-0.6) * cfg.omega.values[0] * m * w1 + cfg.shift.values[0] * a * w1;
        let rhs = (0.25 + 1.5) * (-a * v);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        assert!(residual(&cfg, &problem, &space, &traj, 1).unwrap() <= 1e-12);
    }

    #[test]
    fn residual_small_at_every_step() {
        let space = Space::new(Mesh1D::new(0.0, PI, 63).unwrap()).unwrap();
        let mut problem = sine_problem(0.5);
        problem.source = Source::Field(Arc::new(|x: f64, t: f64| (1.0 + t * t) * libm::sin(x)));
        let cfg = SchemeConfig::new(0.5, 0.4, 1.0 / 32.0, 32, true).unwrap();
        let traj = solve(&cfg, &problem, &space).unwrap();
        let mut st = Stepper::new(&cfg, &problem, &space).unwrap();
        for n in 1..=32 {
            let r = st.residual(&traj.w, n).unwrap();
            assert!(r <= 1e-11, "n={n}: {r}");
        }
    }

    #[test]
    fn residual_detects_perturbation() {
        let space = Space::new(Mesh1D::new(0.0, PI, 1023).unwrap()).unwrap();
        let problem = sine_problem(0.5);
        let cfg = SchemeConfig::new(0.5, 0.4, 1.0 / 64.0, 32, true).unwrap();
        let mut traj = solve(&cfg, &problem, &space).unwrap();
        let mut st = Stepper::new(&cfg, &problem, &space).unwrap();
        assert!(st.residual(&traj.w, 20).unwrap() <= 1e-14);
        traj.w[20][500] *= 1.0 + 1e-6;
        let r = st.residual(&traj.w, 20).unwrap();
        assert!(r > 1e-9, "{r}");
        // wrong correction factor at n = 1
        let other = SchemeConfig::new(0.5, 0.4, 1.0 / 64.0, 32, false).unwrap();
        let traj = solve(&other, &problem, &space).unwrap();
        let r = st.residual(&traj.w, 1).unwrap();
        assert!(r > 1e-8, "{r}");
    }

    #[test]
    fn step_matches_solve() {
        let space = Space::new(Mesh1D::new(0.0, PI, 15).unwrap()).unwrap();
        let problem = sine_problem(0.5);
        let cfg = SchemeConfig::new(0.5, 0.1, 0.125, 4, true).unwrap();
        let traj = solve(&cfg, &problem, &space).unwrap();
        let mut partial = Trajectory::new(traj.v_h.clone(), cfg.tau);
        for n in 1..=4 {
            let w = step(&cfg, &problem, &space, &partial, n).unwrap();
            assert_eq!(w, traj.w[n]);
            partial.w.push(w);
        }
        assert_eq!(step(&cfg, &problem, &space, &partial, 0), Err(Error::InvalidStep));
    }

    #[test]
    fn linearity_in_data() {
        let space = Space::new(Mesh1D::new(0.0, PI, 31).unwrap()).unwrap();
        let cfg = SchemeConfig::new(0.7, 0.2, 1.0 / 16.0, 16, true).unwrap();
        let mk = |initial: InitialData, source: Source| ProblemSpec {
            a: 0.0,
            b: PI,
            t_final: 1.0,
            alpha: 0.7,
            initial,
            source,
        };
        let v1 = InitialData::Smooth { v: Arc::new(libm::sin), dv: Arc::new(libm::cos) };
        let v2 = InitialData::Smooth {
            v: Arc::new(|x| x * (PI - x)),
            dv: Arc::new(|x| PI - 2.0 * x),
        };
        let v12 = InitialData::Smooth {
            v: Arc::new(|x| libm::sin(x) + x * (PI - x)),
            dv: Arc::new(|x| libm::cos(x) + PI - 2.0 * x),
        };
        let f1 = |x: f64, t: f64| t * libm::sin(x);
        let f2 = |x: f64, t: f64| (1.0 + t * t) * x;
        let s1 = solve(&cfg, &mk(v1, Source::Field(Arc::new(f1))), &space).unwrap();
        let s2 = solve(&cfg, &mk(v2, Source::Field(Arc::new(f2))), &space).unwrap();
        let s12 = solve(&cfg, &mk(v12, Source::Field(Arc::new(move |x, t| f1(x, t) + f2(x, t)))), &space).unwrap();
        for n in 0..=16 {
            let (a, b, c) = (s1.u(n), s2.u(n), s12.u(n));
            for i in 0..31 {
                assert!((a[i] + b[i] - c[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn corrected_scheme_tracks_exact_solution() {
        let space = Space::new(Mesh1D::new(0.0, PI, 255).unwrap()).unwrap();
        let problem = sine_problem(0.5);
        let n = 64;
        let cfg = SchemeConfig::new(0.5, 0.0, 1.0 / 128.0, n, true).unwrap();
        let traj = solve(&cfg, &problem, &space).unwrap();
        let e = ml_eval(0.5, -(0.5f64).sqrt()).unwrap();
        let err = l2_error(&space.mesh, &traj.u(n), |x| e * libm::sin(x));
        assert!(err < 3e-5, "{err}");
    }

    #[test]
    fn l2_error_cases() {
        let mesh = Mesh1D::new(0.0, PI, 63).unwrap();
        let zero = GridFunction::zeros(63);
        let e = l2_error(&mesh, &zero, libm::sin);
        assert!((e - (PI / 2.0).sqrt()).abs() < 1e-12);
        let mesh01 = Mesh1D::new(0.0, 1.0, 9).unwrap();
        let tent = |x: f64| if x < 0.5 { x } else { 1.0 - x };
        let u = GridFunction::interpolate(&mesh01, tent);
        assert!(l2_error(&mesh01, &u, tent) <= 1e-14);
        let u = GridFunction::interpolate(&mesh, |x| x * (PI - x));
        let mut u2 = u.clone();
        u2.iter_mut().for_each(|v| *v *= 2.0);
        let a = l2_error(&mesh, &u, libm::sin);
        let b = l2_error(&mesh, &u2, |x| 2.0 * libm::sin(x));
        assert!((b - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn shift_cutoff_changes_little() {
        let space = Space::new(Mesh1D::new(0.0, PI, 31).unwrap()).unwrap();
        let problem = sine_problem(0.5);
        let full = SchemeConfig::new(0.5, 0.4, 1.0 / 64.0, 64, true).unwrap();
        let cut = full.clone().with_shift_cutoff(Some(1e-14));
        let a = solve(&full, &problem, &space).unwrap();
        let b = solve(&cut, &problem, &space).unwrap();
        let d = a.w[64].iter().zip(b.w[64].iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::new(0.0, 0.0, 0.1, 4, true).is_err());
        assert!(SchemeConfig::new(0.5, 1.0, 0.1, 4, true).is_err());
        assert!(SchemeConfig::new(0.5, 0.0, -0.1, 4, true).is_err());
        let space = Space::new(Mesh1D::new(0.0, PI, 7).unwrap()).unwrap();
        let cfg = SchemeConfig::new(0.5, 0.0, 0.1, 4, true).unwrap();
        assert!(solve(&cfg, &sine_problem(0.4), &space).is_err());
    }
}
