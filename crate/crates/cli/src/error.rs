use thiserror::Error;

/// Failure of a subcommand, carrying the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed flags or configuration.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Domain(#[from] twistkit::Error),

    /// A domain error raised while evaluating one scan grid point.
    #[error("at grid point {index} ({point}): {source}")]
    AtPoint { index: usize, point: String, source: twistkit::Error },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{failed} of {total} invariants failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        let domain = |e: &twistkit::Error| match e {
            twistkit::Error::OracleInconsistency { .. } => 4,
            _ => 3,
        };
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(e) => domain(e),
            CliError::AtPoint { source, .. } => domain(source),
            CliError::Io { .. } => 3,
            CliError::VerifyFailed { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
