use thiserror::Error;

use crate::graph::Vertex;

/// Failures of the shared graph substrate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid parameters: {0}")]
    Config(String),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("vertex {v} out of range (n = {n})")]
    VertexRange { v: Vertex, n: u32 },
    #[error("edge {0}-{1} already present")]
    Duplicate(Vertex, Vertex),
    #[error("edge {0}-{1} not present")]
    NotFound(Vertex, Vertex),
    #[error("bundle {u}-{v}: counts {count_u}+{count_v} do not sum to gamma={gamma}")]
    Consistency {
        u: Vertex,
        v: Vertex,
        count_u: u32,
        count_v: u32,
        gamma: u32,
    },
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Failures of the dynamic forest.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error("linking {0}-{1} would close a cycle")]
    Cycle(Vertex, Vertex),
    #[error("forest edge {0}-{1} not present")]
    NotFound(Vertex, Vertex),
    #[error("{0} and {1} are in different trees")]
    NotConnected(Vertex, Vertex),
    #[error("weight {weight} outside [0, {gamma}]")]
    WeightRange { weight: i64, gamma: u32 },
}

/// Failures of the brute-force oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {n} vertices; enumeration is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
}

/// A malformed trace line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct TraceError {
    pub line: usize,
    pub msg: String,
}

/// A structural invariant that failed during verification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{invariant} violated after op {op_index}: {detail}")]
pub struct Violation {
    pub invariant: &'static str,
    pub op_index: usize,
    pub detail: String,
}

/// Top-level error of the engines and the trace harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Violation(#[from] Violation),
    #[error("{0}")]
    Usage(String),
    #[error("{msg}")]
    Io { kind: std::io::ErrorKind, msg: String },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io { kind: e.kind(), msg: e.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
