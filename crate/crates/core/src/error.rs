use std::path::PathBuf;

use thiserror::Error;

use crate::optimizer::SolveResult;
use crate::scenario::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The barrier solver ran out of iterations; `best` is the last strictly
    /// feasible iterate.
    #[error("trajectory subproblem did not converge (kkt residual {residual:.3e})")]
    NotConverged { residual: f64, best: Box<Trajectory> },

    #[error("sub-solver failed after {} AO iterations: {source}", last.iterations)]
    SubSolver {
        #[source]
        source: Box<Error>,
        last: Box<SolveResult>,
    },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
