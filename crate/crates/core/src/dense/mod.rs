//! Dense storage and the dense kernels used by every solver stage.

mod eig;
mod matrix;
mod ops;
mod ritz;
mod sketch;

pub use eig::{small_herm_eig, EigDecomposition};
pub use matrix::{dot, norm2, DenseMatrix};
pub use ops::{
    block_rayleigh, dense_cholesky, herm_product, rayleigh_quotient, rel_error, tri_solve, BlockRayleigh,
    TriMode, TOL_EIG, TOL_ORTH,
};
pub use ritz::{rayleigh_ritz, rayleigh_ritz_projected, RitzPairs};
pub use sketch::{spectral_norm_estimate, DEFAULT_SKETCH_ROWS};
