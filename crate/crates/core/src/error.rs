use std::path::PathBuf;

/// Errors raised by the model, metric and simulation routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operating point has no desired signal (σ_S = 0); use the low-SNR limit accessors.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no solution: {reason}")]
    NoSolution {
        reason: String,
        /// Best noise figure reachable under the search constraints, in dB, when known.
        best_nf_db: Option<f64>,
    },

    #[error("numerical rank deficiency: {0}")]
    NumericalRank(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
