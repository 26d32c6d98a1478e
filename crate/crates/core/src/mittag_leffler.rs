//! One-parameter Mittag-Leffler function `E_α(z) = Σ_k z^k / Γ(αk + 1)`.
//!
//! Only the power series is implemented, restricted to `|z| ≤ 2`. The
//! reference solutions this crate needs evaluate `E_α(−t^α)` with `t ≤ 1`.
//! For negative `z` near the edge of that disc and small α the terms grow
//! large before they decay; the evaluation fails with
//! [`Error::Cancellation`] rather than return a result without accuracy.

use crate::error::{Error, Result};

/// Largest `|z|` accepted by [`ml_eval`].
pub const MAX_ABS_Z: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub alpha: f64,
    /// Absolute truncation tolerance.
    pub tol: f64,
}

impl MLParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter { name: "alpha", value: alpha });
        }
        Ok(Self { alpha, tol: 1e-15 })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(libm::fabs(z) <= MAX_ABS_Z) {
            return Err(Error::OutOfDomain(z));
        }
        if z == 0.0 {
            return Ok(1.0);
        }
        series(self.alpha, z, self.tol)
    }
}

/// `E_α(z)` for `α ∈ (0, 1]`, `|z| ≤ 2`, absolute tolerance `1e−15`.
pub fn ml_eval(alpha: f64, z: f64) -> Result<f64> {
    MLParams::new(alpha)?.eval(z)
}

/// Largest term magnitude tolerated before cancellation in the alternating
/// series would spoil the requested accuracy.
const MAX_TERM: f64 = 1e4;

/// `|z|^k / Γ(αk + 1)`.
fn term_magnitude(alpha: f64, abs_z: f64, k: usize) -> f64 {
    let x = alpha * k as f64 + 1.0;
    if x < 170.0 && k as f64 * libm::log(abs_z) < 600.0 {
        libm::pow(abs_z, k as f64) / libm::tgamma(x)
    } else {
        libm::exp(k as f64 * libm::log(abs_z) - libm::lgamma(x))
    }
}

fn series(alpha: f64, z: f64, tol: f64) -> Result<f64> {
    let abs_z = libm::fabs(z);
    let negative = z < 0.0;
    let mut sum = 1.0;
    let mut prev = 1.0;
    let mut k = 1usize;
    loop {
        let mag = term_magnitude(alpha, abs_z, k);
        let signed = if negative && k % 2 == 1 { -mag } else { mag };
        sum += signed;
        let next = term_magnitude(alpha, abs_z, k + 1);
        // Once the magnitudes decrease, the alternating remainder is bounded by
        // the first omitted term. For z > 0 require a ratio ≤ 1/2 as well, so the
        // remainder is at most the first omitted term again.
        let decreasing = next <= mag && mag <= prev;
        let done = if negative {
            decreasing && next < tol
        } else {
            decreasing && next < tol && next <= 0.5 * mag
        };
        if negative && mag > MAX_TERM {
            return Err(Error::Cancellation { alpha, z });
        }
        if !sum.is_finite() {
            return Err(Error::OutOfDomain(z));
        }
        if done || mag == 0.0 {
            return Ok(sum);
        }
        prev = mag;
        k += 1;
    }
}
