use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value {value:e} at flat index {index} overflows the lower precision")]
    Overflow { index: usize, value: f64 },

    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("triangular factor is singular at diagonal index {index}")]
    SingularTriangular { index: usize },

    #[error("eigenvalue iteration did not converge after {sweeps} rotations")]
    NoConvergence { sweeps: usize },

    #[error("basis is rank deficient; Gram matrix Cholesky failed at index {index}")]
    RankDeficientBasis { index: usize },

    #[error("matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("search block lost rank: no new directions remain")]
    RankCollapse,

    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid sparse matrix: {0}")]
    InvalidSparse(String),

    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("bound assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("bound is vacuous: eps_T = {0} >= 1")]
    BoundVacuous(f64),

    #[error("Rayleigh quotient {rho} lies outside ({lambda1}, {lambda2})")]
    OutOfInterval { rho: f64, lambda1: f64, lambda2: f64 },

    #[error("gamma = {0} >= 1, no contraction guaranteed")]
    GammaTooLarge(f64),

    #[error("accuracy floor denominator is non-positive ({0})")]
    DenominatorNonpositive(f64),
}
