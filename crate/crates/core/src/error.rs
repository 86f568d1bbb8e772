use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is off the unit sphere (|z|^2 - 1 = {deviation:e})")]
    OffSphere { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point is within {tolerance:e} of the Cayley pole")]
    PoleSingularity { tolerance: f64 },

    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),

    #[error("matrix is not unitary: {0}")]
    NotUnitary(String),

    #[error("polynomial parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("monomial basis of size {size} exceeds the hard cap {cap}")]
    BudgetExceeded { size: usize, cap: usize },

    #[error("invalid quadrature request: {0}")]
    InvalidRule(String),

    #[error("field evaluation failed at node {node}: {source}")]
    FieldEvaluation {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("conformal factor is not positive at node {node} (value {value:e})")]
    NonPositiveFactor { node: usize, value: f64 },

    #[error("invalid conformal factor: {0}")]
    InvalidFactor(String),

    #[error("rank truncation left {rank} dimensions (need at least 2)")]
    RankDeficiency { rank: usize },

    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),

    #[error("{count} eigenvalues below the kernel tolerance {tolerance:e}")]
    KernelDimensionAnomaly { count: usize, tolerance: f64 },

    #[error("test function is constant on the quadrature nodes (centered norm {norm:e})")]
    DegenerateTestFunction { norm: f64 },

    #[error("measure is supported on a single point")]
    DegenerateMeasure,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error(
        "balancing did not converge after {iterations} iterations (best residual {residual:e}, t = {t})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        t: f64,
        pole: Vec<f64>,
    },
}
