use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph file: {0}")]
    Syntax(String),

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("unknown builtin graph {0:?} (expected one of C20, C24, C26)")]
    UnknownBuiltin(String),

    #[error("invalid vertex count {0}: need an even n >= 20 other than 22")]
    InvalidVertexCount(usize),

    #[error("graph has no hexagons, hexagon sums are unconstrained")]
    NoHexagons,

    #[error("pair (S_p={sp}, S_h={sh}) is infeasible: {reason}")]
    InfeasiblePair { sp: i64, sh: i64, reason: String },

    #[error("configuration has {got} labels, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("not a permutation of 1..{0}")]
    NotPermutation(usize),

    #[error("solutions were not stored; rerun with storage enabled")]
    SolutionsNotStored,

    #[error("empty solution matrix")]
    EmptyMatrix,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("projection dimension {k} out of range 1..={n}")]
    DimensionOutOfRange { k: usize, n: usize },

    #[error("malformed solution file, line {line}: {reason}")]
    SolutionFile { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
