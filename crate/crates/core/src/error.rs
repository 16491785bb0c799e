use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("graph has {0} vertices, supported range is 1..=64")]
    GraphSize(usize),
    #[error("graph is not two-colorable")]
    NotBipartite,
    #[error("graph mismatch: {0}")]
    GraphMismatch(String),
    #[error("probability parameter {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid qubits: {0}")]
    InvalidQubits(String),
    #[error("dense simulation limited to {limit} qubits, requested {requested}")]
    DenseLimit { limit: usize, requested: usize },
    #[error("state not normalized: total weight {0}")]
    NotNormalized(f64),
    #[error("purification failed: success probability {0:e}")]
    ProtocolFailure(f64),
    #[error("ambiguous syndrome pattern: {0}")]
    AmbiguousPattern(String),
    #[error("enumeration of {0} terms exceeds the cap")]
    EnumerationCap(u128),
    #[error("no feasible localization parameter")]
    Infeasible,
    #[error("purification did not converge after {0} cycles")]
    NotConverged(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(SimError::InvalidProbability(p))
    }
}
