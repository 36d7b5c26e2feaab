use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parity target {even_fraction} is not achievable on {n} nodes")]
    InvalidParity { n: usize, even_fraction: f64 },

    #[error("generation failed after {attempts} attempts: {reason}")]
    Unreachable { attempts: usize, reason: String },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("graph with {n} nodes exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid QAOA parameters: {0}")]
    InvalidParams(String),

    #[error("donor records have depth {found}, requested depth {expected}")]
    DepthMismatch { expected: usize, found: usize },

    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("{0} is not implemented")]
    Unimplemented(&'static str),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
