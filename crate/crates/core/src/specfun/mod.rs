//! Self-contained special-function kernel.
//!
//! Everything here is a pure function of its arguments. Series carry an
//! explicit relative tolerance (default [`DEFAULT_TOL`]) and a hard cap of
//! [`TERM_CAP`] terms; exceeding the cap is reported as
//! [`Error::ConvergenceFailure`](crate::Error::ConvergenceFailure).

mod bessel;
mod gamma;
mod hypergeometric;
mod polynomials;

pub use bessel::{bessel_j, bessel_j_int, bessel_ratio};
pub use gamma::{binomial, factorial, gamma, ln_gamma, pochhammer};
pub use hypergeometric::hyp2f2;
pub use polynomials::{gegenbauer_coeff, gegenbauer_weights, laguerre};

use serde::Serialize;

/// Default relative tolerance for series summation.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Maximum number of terms any series may consume.
pub const TERM_CAP: usize = 10_000;

/// Outcome of a truncated summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult<T = f64> {
    pub value: T,
    pub terms_used: usize,
    /// Absolute bound on the dropped tail.
    pub truncation_estimate: f64,
}
