//! Zeros of random trigonometric polynomials and of their sinc-kernel
//! Gaussian limit.
//!
//! * [`coeffs`]: reproducible streams and standardized coefficient laws.
//! * [`trigpoly`]: evaluation of `X_N`, the kernels `r_N` and `sc`, and the
//!   covariance of values and derivatives at a finite set of times.
//! * [`zerocount`]: grid-scan and companion-polynomial zero counters, and the
//!   Kac regularized count.
//! * [`sincproc`]: sample paths of the stationary sinc-covariance process.
//! * [`rice`]: Kac–Rice factorial moments of the limit zero count.
//! * [`stats`]: ensemble summaries, two-sample KS and universality reports.
//! * [`ensemble`]: deterministic parallel replication driver.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coeffs;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod path;
pub mod quad;
pub mod rice;
pub mod sincproc;
pub mod stats;
pub mod trigpoly;
pub mod zerocount;

pub use error::{Error, Result};
