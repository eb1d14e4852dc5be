use std::path::PathBuf;

use crate::arch::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Domain failures map to CLI exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown ELU `{0}`")]
    UnknownElu(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid architecture:\n{0}")]
    Validation(ValidationReport),

    #[error("switch configuration error: {0}")]
    Switch(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("mapping error: {0}")]
    Mapping(String),

    #[error("scheduling error: {0}")]
    Schedule(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("code construction error: {0}")]
    Code(String),

    #[error("embedding error: {0}")]
    Embedding(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

pub(crate) fn ensure_unit_interval(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1], got {value}")))
    }
}
