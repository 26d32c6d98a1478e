//! Shifted convolution-quadrature weights and a corrected BDF2 θ-scheme for
//! the one-dimensional subdiffusion problem
//!
//! ```text
//! ∂_t^α u − Δu = f   in (a, b) × (0, T],   u = 0 on the boundary,   u(·, 0) = v
//! ```
//!
//! The crate is `no_std` (it needs `alloc`). Modules, bottom-up:
//!
//! - [`series`]: polynomials, BDF generating polynomials, the linear-time weight
//!   recurrence for `[P(ζ)]^α e^{θQ(ζ)}`, shift weights, and an independent
//!   log/exp series oracle.
//! - [`mittag_leffler`]: `E_α(z)` on `|z| ≤ 2`, for closed-form reference solutions.
//! - [`fem`]: P1 finite elements on a uniform interval mesh, L² and Ritz
//!   projections, tridiagonal solves.
//! - [`stepper`]: the standard and corrected fully discrete schemes.

#![no_std]
// `!(x < y)` is used on purpose to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values are pasted with all the digits mpmath printed
#![cfg_attr(test, allow(clippy::excessive_precision))]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod dd;
pub mod error;
pub mod fem;
pub mod mittag_leffler;
pub mod series;
pub mod stepper;

pub use error::{Error, Result};
pub use fem::{GridFunction, Mesh1D, Space, TridiagonalMatrix};
pub use series::{Polynomial, WeightKind, WeightSequence};
pub use stepper::{InitialData, ProblemSpec, SchemeConfig, Source, Trajectory};
