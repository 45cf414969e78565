use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CegaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CegaError {
    /// Malformed graph, mismatched dimensions, or inconsistent structures.
    #[error("structural error: {0}")]
    Structural(String),

    /// Invalid configuration values.
    #[error("config error: {0}")]
    Config(String),

    /// A call whose arguments violate the operation's contract.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numerical error: {what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    TrainingDivergence { epoch: usize, loss: f64 },

    #[error("query budget exceeded: {requested} distinct nodes requested, budget is {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("{}:{line}: {msg}", file.display())]
    Load {
        file: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CegaError {
    pub(crate) fn load(file: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        CegaError::Load {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CegaError::Io {
            path: path.into(),
            source,
        }
    }
}
