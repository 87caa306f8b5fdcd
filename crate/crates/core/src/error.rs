//! Error types shared across the library.
//!
//! Every error maps to one of three coarse kinds so that callers (notably the
//! CLI) can translate failures into stable exit codes: invalid configuration,
//! bad input data, and numerical breakdown.

use std::path::PathBuf;

/// Coarse failure category, used for exit-code mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller supplied an invalid parameter or inconsistent request.
    Validation,
    /// Input data is missing, malformed, or inconsistent.
    Data,
    /// A numerically well-posed computation broke down.
    Numerical,
}

/// Library error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("{context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("panels are misaligned: {reason}")]
    MisalignedPanels { reason: String },

    #[error("{context}: need at least {required} observations, got {actual}")]
    InsufficientData {
        context: String,
        required: usize,
        actual: usize,
    },

    #[error("singular regressor matrix (condition number {condition:.3e}) in window [{window_start}]")]
    SingularFit {
        condition: f64,
        window_start: String,
    },

    #[error("degenerate residual covariance: {reason}")]
    DegenerateCovariance { reason: String },

    #[error("rank-deficient matrix in {context}")]
    RankDeficient { context: &'static str },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("{dropped} of {total} bootstrap replications failed (more than 1%)")]
    ExcessiveDrops { dropped: usize, total: usize },
}

impl Error {
    /// Coarse category of this error.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParam { .. } | Error::ShapeMismatch { .. } => ErrorKind::Validation,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::MisalignedPanels { .. }
            | Error::InsufficientData { .. } => ErrorKind::Data,
            Error::SingularFit { .. }
            | Error::DegenerateCovariance { .. }
            | Error::RankDeficient { .. }
            | Error::NonFinite { .. }
            | Error::ExcessiveDrops { .. } => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
