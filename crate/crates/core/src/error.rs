use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("empty accumulator: {0}")]
    EmptyData(&'static str),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("sample size {n} below the minimum {min} required for fitting")]
    SampleSize { n: u64, min: u64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        trace: Vec<f64>,
    },

    #[error("geometry failure in window {window}: {source}")]
    Geometry {
        window: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 2,
            Error::Data(_)
            | Error::EmptyData(_)
            | Error::DegenerateData(_)
            | Error::SampleSize { .. }
            | Error::Io { .. } => 3,
            Error::NonConvergence { .. } => 4,
            Error::Geometry { .. } | Error::DegenerateInput(_) => 5,
            Error::Domain { .. } | Error::Contract(_) => 3,
        }
    }
}
