use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// TE/TM modes are undefined at `k_z = 0`.
    #[error("singular normalization: {0}")]
    SingularNormalization(String),

    /// A geometric configuration where a phase or ratio is undefined.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("series did not converge within {terms} terms (partial sum {partial_sum:e})")]
    ConvergenceFailure { terms: usize, partial_sum: f64 },

    #[error("quadrature budget of {evaluations} evaluations exhausted (estimate {estimate:e}, error {error:e})")]
    QuadratureBudget { evaluations: usize, estimate: f64, error: f64 },

    /// The two semi-infinite methods disagree beyond their combined error estimates.
    #[error("oracle inconsistency: {first:e} vs {second:e} (allowed {allowed:e})")]
    OracleInconsistency { first: f64, second: f64, allowed: f64 },

    #[error("integral does not converge: {0}")]
    NonConvergent(String),

    #[error("centre-of-mass states are of different variants")]
    VariantMismatch,
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")))
    }
}
