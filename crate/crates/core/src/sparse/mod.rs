//! Sparse Hermitian storage, fill-reducing ordering and sparse Cholesky.

mod chol;
mod csr;
mod ordering;

pub use chol::{sparse_cholesky, sparse_tri_solve, SparseChol, SymbolicChol};
pub use csr::CsrMatrix;
pub use ordering::{bandwidth, rcm_ordering};
