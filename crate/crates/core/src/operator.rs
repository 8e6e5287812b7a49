//! Hermitian operators the solvers can multiply by.

use crate::dense::DenseMatrix;
use crate::error::Result;
use crate::scalar::{Scalar, WorkingScalar};
use crate::sparse::CsrMatrix;

/// A square linear map applied to blocks of column vectors.
pub trait Operator<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// `A X`; panics when `x` does not have `dim()` rows.
    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T>;
}

impl<T: Scalar> Operator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.mul(x)
    }
}

impl<T: Scalar> Operator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.spmv_block(x).expect("operator applied to a block of the wrong height")
    }
}

/// Dense or sparse Hermitian matrix.
#[derive(Debug, Clone)]
pub enum Matrix<T> {
    Dense(DenseMatrix<T>),
    Sparse(CsrMatrix<T>),
}

impl<T: Scalar> Matrix<T> {
    pub fn n(&self) -> usize {
        match self {
            Matrix::Dense(a) => a.nrows(),
            Matrix::Sparse(a) => a.n(),
        }
    }

    /// Stored entries (all `n²` for a dense matrix).
    pub fn nnz(&self) -> usize {
        match self {
            Matrix::Dense(a) => a.nrows() * a.ncols(),
            Matrix::Sparse(a) => a.nnz(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        match self {
            Matrix::Dense(a) => a.clone(),
            Matrix::Sparse(a) => a.to_dense(),
        }
    }

    /// `Π^* A Π` with `perm[new] = old`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        Ok(match self {
            Matrix::Dense(a) => Matrix::Dense(DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(perm[i], perm[j])])),
            Matrix::Sparse(a) => Matrix::Sparse(a.permute(perm)?),
        })
    }
}

impl<W: WorkingScalar> Matrix<W> {
    pub fn to_lower(&self) -> Result<Matrix<W::Lower>> {
        Ok(match self {
            Matrix::Dense(a) => Matrix::Dense(crate::precision::to_lower(a)?),
            Matrix::Sparse(a) => Matrix::Sparse(a.to_lower()?),
        })
    }
}

impl<T: Scalar> Operator<T> for Matrix<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        match self {
            Matrix::Dense(a) => a.apply(x),
            Matrix::Sparse(a) => a.apply(x),
        }
    }
}

impl<T> From<DenseMatrix<T>> for Matrix<T> {
    fn from(a: DenseMatrix<T>) -> Self {
        Matrix::Dense(a)
    }
}

impl<T> From<CsrMatrix<T>> for Matrix<T> {
    fn from(a: CsrMatrix<T>) -> Self {
        Matrix::Sparse(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_sparse_agree() {
        let d = DenseMatrix::from_row_major(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let s = CsrMatrix::from_dense(&d).unwrap();
        let x = DenseMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
        assert_eq!(Matrix::Dense(d.clone()).apply(&x), Matrix::Sparse(s.clone()).apply(&x));
        let perm = [2, 0, 1];
        let pd = Matrix::Dense(d).permute(&perm).unwrap().to_dense();
        let ps = Matrix::Sparse(s).permute(&perm).unwrap().to_dense();
        assert_eq!(pd, ps);
    }
}
