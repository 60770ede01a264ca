use crate::pursuit::SparseCode;

/// Crate-wide error type.
///
/// File-format problems (`BadMagic`, `Format`, `ChecksumMismatch`, `Io`),
/// numeric failures (`LassoNoConvergence`, `BpNoConvergence`) and
/// infeasibility are kept as distinct variants so callers can map them to
/// distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no training data")]
    NoTrainingData,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid block partition: {0}")]
    InvalidBlocks(String),

    #[error("NC requires blocked dictionary")]
    MissingBlocks,

    #[error("lasso did not converge within {sweeps} sweeps (duality gap {gap:.3e})")]
    LassoNoConvergence {
        sweeps: usize,
        gap: f64,
        /// Last iterate, usable as a warm start or for diagnostics.
        last: Box<SparseCode>,
    },

    #[error("basis pursuit did not converge within {iterations} iterations (last residual {last_residual:.3e})")]
    BpNoConvergence {
        iterations: usize,
        last_residual: f64,
        /// Feasibility residual per logged iteration.
        history: Vec<f64>,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("missing scores for labeled frames: {0:?}")]
    MissingScores(Vec<u32>),

    #[error("degenerate ROC: fewer than two points")]
    DegenerateRoc,

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by unreadable or inconsistent input files.
    pub fn is_format_error(&self) -> bool {
        matches!(
            self,
            Error::BadMagic { .. } | Error::ChecksumMismatch { .. } | Error::Format(_) | Error::Io(_)
        )
    }

    /// True for numeric failures (solver non-convergence).
    pub fn is_numeric_error(&self) -> bool {
        matches!(
            self,
            Error::LassoNoConvergence { .. } | Error::BpNoConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
