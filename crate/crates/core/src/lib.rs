//! Second-level sample-size limits for SP800-22 two-level testing.
//!
//! The crate computes the true distribution `{q_i}` of approximated p-values
//! of several one-level tests (by exhaustive enumeration, binomial scans or
//! Monte Carlo), measures its chi-squared discrepancy from the uniform
//! distribution, derives safe and risky second-level sample sizes, and runs
//! two-level uniformity tests under uniform or corrected nulls.

pub mod error;
pub mod bitgen;
pub mod discrepancy;
pub mod exactdist;
pub mod mcdist;
pub mod numerics;
pub mod onelevel;
pub mod reference;
pub mod twolevel;

pub use error::{Error, Result};
