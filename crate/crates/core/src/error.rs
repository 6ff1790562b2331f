use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("entry ({i}, {j}) is not Hermitian-symmetric (mismatch {mismatch:.3e})")]
    Symmetry { i: u64, j: u64, mismatch: f64 },

    #[error("domain: {0}")]
    Domain(String),

    #[error("total sampling weight is {0}; nothing to sample")]
    DegenerateWeight(f64),

    #[error("oracle returned invalid marginal {value} for prefix of length {prefix_len}")]
    OracleFault { prefix_len: u32, value: f64 },

    #[error("numerical failure in {context}")]
    Numerical { context: String },

    #[error("resource: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn numerical(context: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
