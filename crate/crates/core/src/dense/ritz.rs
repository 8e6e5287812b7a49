use super::eig::small_herm_eig;
use super::matrix::DenseMatrix;
use super::ops::{dense_cholesky, tri_solve, TriMode};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RitzPairs<T: Scalar> {
    /// Coefficients `C` with `C^* (S^*S) C = I`; the Ritz vectors are `S C`.
    pub coeffs: DenseMatrix<T>,
    /// Ritz values, ascending.
    pub values: Vec<T::Real>,
}

/// The `m` smallest Ritz pairs of `A` on `span(S)`, from the pencil
/// `S^*AS y = λ S^*S y`.
pub fn rayleigh_ritz<T: Scalar, A: Operator<T> + ?Sized>(
    s: &DenseMatrix<T>,
    a: &A,
    m: usize,
) -> Result<RitzPairs<T>> {
    if s.nrows() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, operator dimension {}",
            s.nrows(),
            a.dim()
        )));
    }
    let a_s = a.apply(s);
    rayleigh_ritz_projected(&s.adjoint_mul(s), &s.adjoint_mul(&a_s), m)
}

/// Same as [`rayleigh_ritz`] given the Gram matrix `S^*S` and the projection `S^*AS`.
pub fn rayleigh_ritz_projected<T: Scalar>(
    gram: &DenseMatrix<T>,
    projected: &DenseMatrix<T>,
    m: usize,
) -> Result<RitzPairs<T>> {
    let q = gram.nrows();
    if m > q || projected.shape() != (q, q) || !gram.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "requested {m} Ritz pairs from a {}x{} pencil",
            q,
            gram.ncols()
        )));
    }
    let l = dense_cholesky(&gram.hermitian_part()).map_err(|e| match e {
        Error::NotPositiveDefinite { index, .. } => Error::RankDeficientBasis { index },
        other => other,
    })?;
    // L^{-1} H L^{-*}
    let y = tri_solve(&l, &projected.hermitian_part(), TriMode::Forward)?;
    let reduced = tri_solve(&l, &y.adjoint(), TriMode::Forward)?.adjoint();
    let eig = small_herm_eig(&reduced)?;
    let coeffs = tri_solve(&l, &eig.vectors.columns(0..m), TriMode::BackwardAdjoint)?;
    Ok(RitzPairs {
        coeffs,
        values: eig.values[..m].to_vec(),
    })
}
