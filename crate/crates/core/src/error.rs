use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FelixError {
    #[error("invalid prosociality state: {0}")]
    InvalidProsociality(String),

    #[error("({i}, {j}) is not an edge of the graph")]
    NotAnEdge { i: usize, j: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear system is singular or ill-conditioned (residual {residual:e})")]
    Singular { residual: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("did not converge after {iterations} iterations: {what}")]
    NonConvergence { what: String, iterations: usize },
}

pub type Result<T> = std::result::Result<T, FelixError>;
