//! Cholesky preconditioners `T = Π L^{-*} L^{-1} Π^*` factored in working or
//! lower precision.

use crate::dense::{dense_cholesky, spectral_norm_estimate, tri_solve, DenseMatrix, TriMode, DEFAULT_SKETCH_ROWS};
use crate::error::{Error, Result};
use crate::operator::Matrix;
use crate::precision::{to_lower, to_working, PrecisionTag};
use crate::scalar::{Scalar, WorkingScalar};
use crate::sparse::{rcm_ordering, sparse_cholesky, SparseChol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PrecondKind {
    DenseChol,
    SparseChol,
    /// Dense working-precision `A^{-1}`, for analysis against a near-ideal preconditioner.
    ExactInverseShadow,
    /// `T = I`.
    Identity,
}

/// Fill-reducing ordering applied before a sparse factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Natural,
    Rcm,
}

#[derive(Debug, Clone)]
enum Factor<W: WorkingScalar> {
    DenseWorking(DenseMatrix<W>),
    DenseLower(DenseMatrix<W::Lower>),
    SparseWorking(SparseChol<W>),
    SparseLower(SparseChol<W::Lower>),
    Inverse(DenseMatrix<W>),
    Identity,
}

/// An immutable preconditioner; applying it is a fixed linear map.
#[derive(Debug, Clone)]
pub struct Preconditioner<W: WorkingScalar> {
    kind: PrecondKind,
    factor: Factor<W>,
    build_precision: PrecisionTag,
    shift_applied: f64,
    n: usize,
}

fn shifted_dense<W: WorkingScalar>(a: &DenseMatrix<W>, shift: f64) -> DenseMatrix<W> {
    let mut s = a.clone();
    for i in 0..s.nrows() {
        s[(i, i)] += W::from_real(shift);
    }
    s
}

impl<W: WorkingScalar> Preconditioner<W> {
    /// Cholesky preconditioner of `A` in `precision`; sparse matrices are RCM-ordered.
    pub fn build(a: &Matrix<W>, precision: PrecisionTag) -> Result<Self> {
        Self::build_with(a, precision, Ordering::Rcm)
    }

    /// As [`Preconditioner::build`] with an explicit ordering for the sparse path.
    ///
    /// A lower-precision factorization that breaks down is retried once on
    /// `A + δI` with `δ = 10·u_l·‖A‖₂(est)`.
    pub fn build_with(a: &Matrix<W>, precision: PrecisionTag, ordering: Ordering) -> Result<Self> {
        match Self::factor(a, precision, ordering, 0.0) {
            Err(Error::NotPositiveDefinite { .. }) if precision == PrecisionTag::Lower => {
                let delta = 10.0 * PrecisionTag::Lower.unit_roundoff() * spectral_norm_estimate(a, DEFAULT_SKETCH_ROWS, 0);
                Self::factor(a, precision, ordering, delta)
            }
            other => other,
        }
    }

    fn factor(a: &Matrix<W>, precision: PrecisionTag, ordering: Ordering, shift: f64) -> Result<Self> {
        let n = a.n();
        let (kind, factor) = match a {
            Matrix::Dense(d) => {
                let d = if shift > 0.0 { shifted_dense(d, shift) } else { d.clone() };
                let factor = match precision {
                    PrecisionTag::Working => Factor::DenseWorking(dense_cholesky(&d)?),
                    PrecisionTag::Lower => Factor::DenseLower(dense_cholesky(&to_lower(&d)?)?),
                };
                (PrecondKind::DenseChol, factor)
            }
            Matrix::Sparse(s) => {
                let s = if shift > 0.0 { s.shift_diagonal(shift)? } else { s.clone() };
                let perm = match ordering {
                    Ordering::Natural => (0..n).collect(),
                    Ordering::Rcm => rcm_ordering(&s),
                };
                let factor = match precision {
                    PrecisionTag::Working => Factor::SparseWorking(sparse_cholesky(&s, &perm)?),
                    PrecisionTag::Lower => Factor::SparseLower(sparse_cholesky(&s.to_lower()?, &perm)?),
                };
                (PrecondKind::SparseChol, factor)
            }
        };
        Ok(Self {
            kind,
            factor,
            build_precision: precision,
            shift_applied: shift,
            n,
        })
    }

    /// Dense working-precision `A^{-1}`.
    pub fn exact_inverse(a: &Matrix<W>) -> Result<Self> {
        let d = a.to_dense();
        let n = d.nrows();
        let l = dense_cholesky(&d)?;
        let y = tri_solve(&l, &DenseMatrix::identity(n), TriMode::Forward)?;
        let inv = tri_solve(&l, &y, TriMode::BackwardAdjoint)?.hermitian_part();
        Ok(Self {
            kind: PrecondKind::ExactInverseShadow,
            factor: Factor::Inverse(inv),
            build_precision: PrecisionTag::Working,
            shift_applied: 0.0,
            n,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            kind: PrecondKind::Identity,
            factor: Factor::Identity,
            build_precision: PrecisionTag::Working,
            shift_applied: 0.0,
            n,
        }
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn build_precision(&self) -> PrecisionTag {
        self.build_precision
    }

    pub fn shift_applied(&self) -> f64 {
        self.shift_applied
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fill-reducing permutation of a sparse factor (`perm[new] = old`).
    pub fn perm(&self) -> Option<&[usize]> {
        match &self.factor {
            Factor::SparseWorking(f) => Some(f.perm()),
            Factor::SparseLower(f) => Some(f.perm()),
            _ => None,
        }
    }

    /// Stored entries of the Cholesky factor, if any.
    pub fn factor_nnz(&self) -> Option<usize> {
        match &self.factor {
            Factor::DenseWorking(_) | Factor::DenseLower(_) => Some(self.n * (self.n + 1) / 2),
            Factor::SparseWorking(f) => Some(f.nnz_l()),
            Factor::SparseLower(f) => Some(f.nnz_l()),
            _ => None,
        }
    }

    /// Lower-triangular factor in working precision (dense factors only).
    pub fn dense_factor(&self) -> Option<DenseMatrix<W>> {
        match &self.factor {
            Factor::DenseWorking(l) => Some(l.clone()),
            Factor::DenseLower(l) => Some(to_working(l)),
            Factor::SparseWorking(f) => Some(f.l_dense()),
            Factor::SparseLower(f) => Some(to_working(&f.l_dense())),
            _ => None,
        }
    }

    fn check(&self, rows: usize) -> Result<()> {
        if rows != self.n {
            return Err(Error::DimensionMismatch(format!(
                "preconditioner of dimension {} applied to {rows} rows",
                self.n
            )));
        }
        Ok(())
    }

    /// `W = T R`, with every operation of the solve chain in the build precision.
    pub fn apply(&self, r: &DenseMatrix<W>) -> Result<DenseMatrix<W>> {
        self.check(r.nrows())?;
        match &self.factor {
            Factor::DenseWorking(l) => chol_solve(l, r),
            Factor::DenseLower(l) => Ok(to_working(&chol_solve(l, &to_lower(r)?)?)),
            Factor::SparseWorking(f) => f.solve(r, true),
            Factor::SparseLower(f) => Ok(to_working(&f.solve(&to_lower(r)?, true)?)),
            Factor::Inverse(inv) => Ok(inv.mul(r)),
            Factor::Identity => Ok(r.clone()),
        }
    }

    /// `T R` for lower-precision data, as used by a lower-precision iteration.
    pub fn apply_lower(&self, r: &DenseMatrix<W::Lower>) -> Result<DenseMatrix<W::Lower>> {
        self.check(r.nrows())?;
        match &self.factor {
            Factor::DenseLower(l) => chol_solve(l, r),
            Factor::SparseLower(f) => f.solve(r, true),
            Factor::Identity => Ok(r.clone()),
            _ => to_lower(&self.apply(&to_working(r))?),
        }
    }
}

fn chol_solve<T: Scalar>(l: &DenseMatrix<T>, r: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let y = tri_solve(l, r, TriMode::Forward)?;
    tri_solve(l, &y, TriMode::BackwardAdjoint)
}

/// A preconditioner as seen from an iteration running in scalar type `T`.
pub trait PrecondOp<T: Scalar>: Sync {
    fn apply_block(&self, r: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;
}

impl<W: WorkingScalar> PrecondOp<W> for Preconditioner<W> {
    fn apply_block(&self, r: &DenseMatrix<W>) -> Result<DenseMatrix<W>> {
        self.apply(r)
    }
}

/// Lower-precision view of a [`Preconditioner`].
pub struct LowerView<'a, W: WorkingScalar>(pub &'a Preconditioner<W>);

impl<W: WorkingScalar> PrecondOp<W::Lower> for LowerView<'_, W> {
    fn apply_block(&self, r: &DenseMatrix<W::Lower>) -> Result<DenseMatrix<W::Lower>> {
        self.0.apply_lower(r)
    }
}
