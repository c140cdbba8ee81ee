use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error in {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    /// The propagator could not reach the requested time.
    #[error("integration failed at t = {last_good_t} ns: {reason}")]
    Integration { last_good_t: f64, reason: String },

    /// A stage of the tunnel-splitting extraction could not be completed.
    #[error("extraction failed at stage `{stage}`: {reason}")]
    Extraction { stage: &'static str, reason: String },

    /// A configuration or data file could not be parsed.
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Integration { .. } => "integration",
            Error::Extraction { .. } => "extraction",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}

/// Rejects NaN and infinities.
pub(crate) fn ensure_finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(
            field,
            format!("expected a finite value, got {value}"),
        ))
    }
}
