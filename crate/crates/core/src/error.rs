use thiserror::Error;

/// Errors raised by the physics pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("no stable steady-state branch")]
    NoStableBranch,

    #[error("steady-state branch is unstable; spectral integrals diverge")]
    UnstableBranch,

    #[error("spectral tail did not converge up to omega_max = {omega_max:.6e} rad/s (error {error:.3e})")]
    TailNotConverged { omega_max: f64, error: f64 },

    #[error("quadrature did not reach tolerance {tol:.1e} (error {error:.3e})")]
    QuadratureNotConverged { tol: f64, error: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Validation { .. } | Error::InvalidSweep(_) | Error::UnknownKey(_) | Error::Config { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
