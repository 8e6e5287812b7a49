//! Mixed-precision PINVIT and LOBPCG for the smallest eigenpairs of
//! Hermitian positive definite matrices.
//!
//! Working precision is binary64 and the lower precision is binary32. The
//! preconditioner is a Cholesky factorization computed in lower precision,
//! block orthogonalization uses a two-level QR that reaches working-precision
//! orthogonality, and the two-stage driver runs LOBPCG entirely in lower
//! precision before refining in working precision.

pub mod analysis;
pub mod dense;
pub mod error;
pub mod operator;
pub mod ortho;
pub mod precision;
pub mod precond;
pub mod scalar;
pub mod solver;
pub mod sparse;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use error::{Error, Result};
pub use operator::{Matrix, Operator};
pub use precision::PrecisionTag;
pub use scalar::{RealScalar, Scalar, WorkingScalar};
pub use solver::{solve, EigResult, SolverConfig, Variant};
