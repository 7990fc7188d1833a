use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid identifier: {0}")]
    InvalidId(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} budget exceeded: limit {limit}, required at least {required}")]
    BudgetExceeded { what: &'static str, limit: u64, required: u64 },

    /// Some deterministic policy induces more than one recurrent class.
    #[error("MDP is not unichain: policy {witness:?} has {classes} recurrent classes")]
    NotUnichain { witness: Vec<usize>, classes: usize },

    #[error("chain induced by the policy is not unichain ({classes} recurrent classes)")]
    ReducibleChain { classes: usize },

    #[error("{what} stopped after {iterations} iterations without converging")]
    IterationCap { what: &'static str, iterations: usize },

    /// An iterative method hit its cap; the last iterate is kept for reporting.
    #[error("{what} stopped after {iterations} rounds without converging")]
    NotConverged { what: &'static str, iterations: usize, last_iterate: Vec<f64> },

    #[error("refused: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } | Error::Refused(_) | Error::IterationCap { .. } | Error::NotConverged { .. } => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::InvalidId(_) => "invalid-id",
            Error::InvalidInput(_) => "invalid-input",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::NotUnichain { .. } => "not-unichain",
            Error::ReducibleChain { .. } => "reducible-chain",
            Error::IterationCap { .. } => "iteration-cap",
            Error::NotConverged { .. } => "not-converged",
            Error::Refused(_) => "refused",
            Error::Io(_) => "io",
        }
    }
}
