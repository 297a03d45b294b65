//! Errors surfaced by the harness and the command line.

use crate::graph::io::GraphError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 1 verification, 2 input, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Verification(_) => 1,
            Error::Input(_) | Error::Graph(_) | Error::Io(_) => 2,
            Error::Internal(_) => 3,
        }
    }
}
