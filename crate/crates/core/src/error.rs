use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the design pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum IsacError {
    #[error("validation error: {0}")]
    Validation(String),

    /// Rank-one recovery hit a user whose relaxed beamformer carries no
    /// power along its channel.
    #[error("degenerate beamformer for user {user}: h^H C h = {value:e} below {threshold:e}")]
    DegenerateBeamformer {
        user: usize,
        value: f64,
        threshold: f64,
    },

    #[error("matrix is not PSD: minimum eigenvalue {min_eig:e} below {threshold:e}")]
    NotPsd { min_eig: f64, threshold: f64 },

    #[error("subproblem infeasible: {0}")]
    Infeasible(String),

    #[error("solver failed ({status}): {context}")]
    Solver { status: String, context: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("range error in `{field}`: {message}")]
    Range { field: String, message: String },

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IsacError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        IsacError::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IsacError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, IsacError>;
