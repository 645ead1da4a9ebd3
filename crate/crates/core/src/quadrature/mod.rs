//! Numerical oracles: adaptive Gauss-Kronrod quadrature, semi-infinite
//! oscillatory Bessel-product integration and finite-difference operators.

mod fd;
mod finite;
mod oscillatory;

pub use fd::{fd_curl, fd_divergence, fd_laplacian, VectorField};
pub use finite::{integrate_finite, integrate_finite_with, integrate_semi_infinite, QuadOptions};
pub use oscillatory::{
    cross_validated, integrate_bessel_semiinfinite, wynn_epsilon, CrossValidated, Oscillation, SemiInfiniteMethod,
};

use serde::Serialize;

/// Default absolute tolerance for the semi-infinite oracles.
pub const ORACLE_TOL: f64 = 1e-9;

/// Default absolute tolerance for finite adaptive quadrature.
pub const FINITE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// `true` implies `abs_error_estimate <= ` the requested tolerance.
    pub converged: bool,
}
