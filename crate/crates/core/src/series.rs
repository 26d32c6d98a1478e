//! Polynomials, BDF generating polynomials and convolution weights.
//!
//! Every weight family here is the Taylor expansion at ζ = 0 of
//!
//! ```text
//! ω(ζ) = [P(ζ)]^α · e^{θ Q(ζ)}
//! ```
//!
//! for polynomials `P`, `Q`. Differentiating and multiplying by `P` gives
//! `P ω′ = ω G` with `G = αP′ + θPQ′`, and matching the coefficient of
//! `ζ^{n−1}` yields a recurrence whose cost per coefficient is bounded by
//! `deg P + deg G`, independent of `n`. That recurrence is [`omega_weights`].
//! [`oracle::series_oracle`] computes the same coefficients the long way
//! (series log, scale, series exp) and exists for cross-checking.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Dense polynomial in ζ; `coeffs[j]` multiplies `ζ^j`.
///
/// Trailing zeros are stripped on construction, so the zero polynomial has an
/// empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `ζ^j`, zero past the end.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| j as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| s * c).collect())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..len).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Generating polynomial of the order-`p` backward difference formula,
/// `δ(ζ) = Σ_{j=1}^{p} (1 − ζ)^j / j`, expanded in powers of ζ.
pub fn bdf_polynomial(p: usize) -> Result<Polynomial> {
    if !(1..=6).contains(&p) {
        return Err(Error::InvalidOrder(p));
    }
    let mut coeffs = vec![0.0; p + 1];
    for j in 1..=p {
        // (1 − ζ)^j = Σ_k C(j, k) (−1)^k ζ^k
        let mut binom = 1.0;
        for k in 0..=j {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[k] += sign * binom / j as f64;
            binom = binom * (j - k) as f64 / (k + 1) as f64;
        }
    }
    Ok(Polynomial::new(coeffs))
}

/// `δ(ζ) = 3/2 − 2ζ + ζ²/2`.
pub fn bdf2() -> Polynomial {
    Polynomial::new(vec![1.5, -2.0, 0.5])
}

/// `G = αP′ + θ·P·Q′`, the right-hand factor of `P ω′ = ω G`.
pub fn g_polynomial(p: &Polynomial, q: &Polynomial, alpha: f64, theta: f64) -> Polynomial {
    let a = p.derivative().scale(alpha);
    let b = (p * &q.derivative()).scale(theta);
    &a + &b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Fractional-derivative weights `ω_j` of `[P]^α e^{θQ}`.
    Omega,
    /// Shift weights `θ_j` of `e^{θQ}`.
    ThetaShift,
}

/// Convolution weights `values[0..=N]` together with the parameters that
/// generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    pub values: Vec<f64>,
    pub alpha: f64,
    pub theta: f64,
    pub kind: WeightKind,
    pub p: Polynomial,
    pub q: Polynomial,
}

impl WeightSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest available index `N`.
    pub fn last_index(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

/// Taylor coefficients 0..=n of `[P]^α e^{θQ}` via the recurrence. No range
/// checks on α, θ beyond finiteness.
fn recurrence(p: &Polynomial, q: &Polynomial, alpha: f64, theta: f64, n: usize) -> Result<Vec<f64>> {
    let p0 = p.coeff(0);
    if p0 == 0.0 {
        return Err(Error::SingularGeneratingFunction);
    }
    if p0 < 0.0 && libm::trunc(alpha) != alpha {
        return Err(Error::LogBranch(p0));
    }
    // G = αP′ + θPQ′ with every product kept to double-double accuracy
    let deg_g = (p.coeffs().len() + q.coeffs().len()).max(p.coeffs().len());
    let gc: Vec<Dd> = (0..deg_g)
        .map(|i| {
            let mut g = Dd::from_f64(p.coeff(i + 1)).scale((i + 1) as f64).scale(alpha);
            for j in 0..=i {
                let dq = Dd::from_f64(q.coeff(j + 1)).scale((j + 1) as f64);
                g = g.add(dq.scale(p.coeff(i - j)).scale(theta));
            }
            g
        })
        .collect();
    let pc = p.coeffs();

    let mut w: Vec<Dd> = Vec::with_capacity(n + 1);
    w.push(Dd::from_f64(libm::pow(p0, alpha) * libm::exp(theta * q.coeff(0))));
    for m in 1..=n {
        // m P_0 ω_m = Σ_{k=1}^{m} G_{k−1} ω_{m−k} − Σ_{k=1}^{m−1} (m−k) P_k ω_{m−k}
        let mut acc = Dd::ZERO;
        for k in 1..=m.min(gc.len()) {
            acc = acc.add(gc[k - 1].mul(w[m - k]));
        }
        for k in 1..m.min(pc.len()) {
            acc = acc.add(w[m - k].scale((m - k) as f64).scale(pc[k]).neg());
        }
        w.push(acc.div_f64(m as f64 * p0));
    }
    let w = w.iter().map(|d| d.hi).collect();
    Ok(w)
}

/// Weights `ω_0..ω_N` of `[P]^α e^{θQ}` in `O(N·(deg P + deg Q))` operations.
pub fn omega_weights(
    p: &Polynomial,
    q: &Polynomial,
    alpha: f64,
    theta: f64,
    n: usize,
) -> Result<WeightSequence> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter { name: "alpha", value: alpha });
    }
    if !(theta > -1.0 && theta < 1.0) {
        return Err(Error::InvalidParameter { name: "theta", value: theta });
    }
    Ok(WeightSequence {
        values: recurrence(p, q, alpha, theta, n)?,
        alpha,
        theta,
        kind: WeightKind::Omega,
        p: p.clone(),
        q: q.clone(),
    })
}

/// Shift weights `θ_0..θ_N`, the coefficients of `e^{θQ(ζ)}`.
///
/// Convolving a grid sequence with these moves the evaluation point by θ
/// steps with second-order accuracy when `Q` is the BDF2 polynomial.
pub fn shift_weights(q: &Polynomial, theta: f64, n: usize) -> Result<WeightSequence> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter { name: "theta", value: theta });
    }
    let one = Polynomial::constant(1.0);
    Ok(WeightSequence {
        values: recurrence(&one, q, 0.0, theta, n)?,
        alpha: 0.0,
        theta,
        kind: WeightKind::ThetaShift,
        p: one,
        q: q.clone(),
    })
}

/// Bound on `|Σ_{j>N} ω_j e^{−jτ}|` above which [`consistency_defect`] refuses
/// to evaluate.
pub const TAIL_LIMIT: f64 = 1e-14;

/// Number of weights [`consistency_defect`] wants for step `tau`:
/// `max(⌈10/τ⌉, 10⁴)`.
pub fn consistency_len(tau: f64) -> usize {
    let by_tau = libm::ceil(10.0 / tau);
    if by_tau > 1e4 {
        by_tau as usize
    } else {
        10_000
    }
}

/// `|τ^{−α} e^{−θτ} Σ_j ω_j e^{−jτ} − 1|`, the consistency defect of the
/// weights on the exponential `e^{t}` sampled with step τ.
///
/// The truncated tail is bounded using `|ω_j| ≤ C j^{−α−1}`, with `C` taken
/// from the last weights available; the call fails if that bound exceeds
/// [`TAIL_LIMIT`].
pub fn consistency_defect(weights: &WeightSequence, alpha: f64, theta: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter { name: "tau", value: tau });
    }
    let w = &weights.values;
    let n = w.len();
    if n < 2 {
        return Err(Error::Truncation { bound: f64::INFINITY, limit: TAIL_LIMIT });
    }
    let scale = libm::pow(tau, -alpha) * libm::exp(-theta * tau);

    let decay = alpha + 1.0;
    let start = n - (n / 10).max(1);
    let c = (start..n)
        .map(|j| libm::fabs(w[j]) * libm::pow(j.max(1) as f64, decay))
        .fold(0.0, f64::max);
    let bound = scale * c * libm::pow(n as f64, -decay) * libm::exp(-(n as f64) * tau)
        / (1.0 - libm::exp(-tau));
    if !(bound <= TAIL_LIMIT) {
        return Err(Error::Truncation { bound, limit: TAIL_LIMIT });
    }

    let ratio = libm::exp(-tau);
    let mut z = 1.0;
    let mut sum = 0.0;
    for &wj in w {
        sum += wj * z;
        z *= ratio;
    }
    Ok(libm::fabs(scale * sum - 1.0))
}

/// Independent route to the coefficients of `[P]^α e^{θQ}`.
///
/// Carried out in double-double arithmetic: for α near 1 the wanted
/// coefficients are many orders below the series terms that cancel to produce
/// them, and plain f64 loses up to 1e−10 relative accuracy by N = 2000.
pub mod oracle {
    use super::*;
    use crate::dd::{dot2, Dd, Split};

    /// Coefficients `1..=n` of `ln P` (index 0 left at zero). Requires `P(0) > 0`.
    fn log_tail(p: &Polynomial, n: usize) -> Result<Vec<Dd>> {
        let p0 = p.coeff(0);
        if !(p0 > 0.0) {
            return Err(Error::LogBranch(p0));
        }
        let deg = p.degree();
        // L = ln P  ⇒  P L′ = P′, i.e. m P_0 L_m = m P_m − Σ_{k=1}^{m−1} k L_k P_{m−k}
        let mut l = vec![Dd::ZERO; n + 1];
        for m in 1..=n {
            let mut acc = Dd::from_f64(m as f64).scale(p.coeff(m));
            for k in m.saturating_sub(deg).max(1)..m {
                acc = acc.add(l[k].scale(k as f64).scale(p.coeff(m - k)).neg());
            }
            l[m] = acc.div_f64(m as f64 * p0);
        }
        Ok(l)
    }

    /// `exp(S)` given `e_0 = exp(S_0)` and `S_1..S_n`.
    fn exp_tail(e0: f64, s: &[Dd], n: usize) -> Vec<Dd> {
        // E = e^S  ⇒  E′ = S′E, i.e. m E_m = Σ_{k=1}^{m} k S_k E_{m−k}
        let ks: Vec<Split> = (0..=n)
            .map(|k| Split::new(s.get(k).copied().unwrap_or(Dd::ZERO).scale(k as f64)))
            .collect();
        let mut e = vec![Dd::ZERO; n + 1];
        let mut es = Vec::with_capacity(n + 1);
        e[0] = Dd::from_f64(e0);
        es.push(Split::new(e[0]));
        for m in 1..=n {
            let acc = dot2((1..=m).map(|k| (ks[k], es[m - k])));
            e[m] = acc.div_f64(m as f64);
            es.push(Split::new(e[m]));
        }
        e
    }

    /// Series logarithm of `p` to `n + 1` terms. Requires `P(0) > 0`.
    pub fn series_log(p: &Polynomial, n: usize) -> Result<Vec<f64>> {
        let mut l: Vec<f64> = log_tail(p, n)?.iter().map(|d| d.hi).collect();
        l[0] = libm::log(p.coeff(0));
        Ok(l)
    }

    /// Series exponential of `s` (`n + 1` terms).
    pub fn series_exp(s: &[f64], n: usize) -> Vec<f64> {
        let sd: Vec<Dd> = s.iter().map(|&x| Dd::from_f64(x)).collect();
        let s0 = s.first().copied().unwrap_or(0.0);
        exp_tail(libm::exp(s0), &sd, n).iter().map(|d| d.hi).collect()
    }

    /// `exp(α·log P + θ·Q)` by quadratic-cost series arithmetic.
    pub fn series_oracle(
        p: &Polynomial,
        q: &Polynomial,
        alpha: f64,
        theta: f64,
        n: usize,
    ) -> Result<WeightSequence> {
        let log_p = log_tail(p, n)?;
        let s: Vec<Dd> = (0..=n)
            .map(|j| log_p[j].scale(alpha).add(Dd::from_f64(q.coeff(j)).scale(theta)))
            .collect();
        // a constant scale error in e_0 carries over unchanged to every coefficient
        let e0 = libm::pow(p.coeff(0), alpha) * libm::exp(theta * q.coeff(0));
        Ok(WeightSequence {
            values: exp_tail(e0, &s, n).iter().map(|d| d.hi).collect(),
            alpha,
            theta,
            kind: if alpha == 0.0 && p.coeffs() == [1.0] {
                WeightKind::ThetaShift
            } else {
                WeightKind::Omega
            },
            p: p.clone(),
            q: q.clone(),
        })
    }
}
