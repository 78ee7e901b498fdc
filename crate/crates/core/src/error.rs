use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OmitError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("steady state did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergent { iterations: usize, residual: f64 },

    #[error("numerically singular system: {0}")]
    NumericalSingularity(String),

    #[error("degenerate evaluation point: {0}")]
    DegeneratePoint(String),

    #[error("outside the regime of validity: {0}")]
    RegimeViolation(String),

    #[error("time integration became unstable at t = {time:e} s")]
    Instability { time: f64 },

    #[error("config error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config error in `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl OmitError {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        OmitError::InvalidParameter { name: name.into(), reason: reason.into() }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        OmitError::ConfigValue { key: key.into(), message: message.into() }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            OmitError::InvalidParameter { .. }
                | OmitError::ConfigSyntax { .. }
                | OmitError::ConfigValue { .. }
                | OmitError::UnsupportedTopology(_)
                | OmitError::Io(_)
        )
    }
}

impl From<std::io::Error> for OmitError {
    fn from(e: std::io::Error) -> Self {
        OmitError::Io(e.to_string())
    }
}

pub type Result<T, E = OmitError> = std::result::Result<T, E>;
