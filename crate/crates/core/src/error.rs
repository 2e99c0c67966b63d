use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum AoiError {
    /// Caller supplied an argument that violates a precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// An iterative solver did not reach its tolerance.
    #[error("{solver} did not converge after {sweeps} sweeps (last residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        residual: f64,
        sweeps: usize,
        /// Residual (or spread) after every outer iteration.
        trace: Vec<f64>,
    },

    /// The expected AoI of some node became unbounded during a solve.
    #[error("{solver}: AoI of node {node} diverged")]
    Diverged { solver: &'static str, node: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl AoiError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        AoiError::Usage(msg.into())
    }

    /// Process exit code used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            AoiError::Usage(_) | AoiError::Json(_) => 2,
            AoiError::NoConvergence { .. } | AoiError::Diverged { .. } => 3,
            AoiError::Io(_) => 4,
        }
    }
}

pub type Result<T, E = AoiError> = std::result::Result<T, E>;
