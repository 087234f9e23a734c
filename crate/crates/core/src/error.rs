use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("line {line}: negative weight {weight} on {src} -- {dst}")]
    NegativeWeight {
        line: usize,
        src: String,
        dst: String,
        weight: f64,
    },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: String },

    #[error("line {line}: conflicting weights {first} and {second} for {src} -- {dst}")]
    ConflictingWeights {
        line: usize,
        src: String,
        dst: String,
        first: f64,
        second: f64,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("graph has no weight")]
    ZeroWeight,

    #[error("weight distribution needs integer weights; apply kappa scaling first")]
    RealWeights,

    #[error("scaled weights overflow the integer range: {0}")]
    Overflow(String),

    #[error("stub matching gave up after {0} consecutive self-pairings")]
    RetryBudgetExhausted(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no structure detected: {0}")]
    NoStructure(&'static str),

    #[error("sample standard deviation is zero")]
    ZeroVariance,

    #[error("{points} distinct points cannot form {clusters} clusters")]
    TooFewPoints { points: usize, clusters: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
