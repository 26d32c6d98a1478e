//! Experiment harness for `fracshift-core`: convergence tables, α-robustness
//! sweeps and shift-weight dumps, written as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind, FileConfig, Reference, Scheme};
pub use error::{HarnessError, Result};
