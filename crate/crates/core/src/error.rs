use thiserror::Error;

use crate::mesh::CellIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("inadmissible state at cell {cell} after step {step} (t = {time}): {detail}")]
    SolverAbort {
        cell: CellIndex,
        step: u64,
        time: f64,
        detail: String,
    },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("run cancelled")]
    Cancelled,

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverAbort { .. } => 2,
            Error::Verification(_) => 3,
            _ => 1,
        }
    }
}
