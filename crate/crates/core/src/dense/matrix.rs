use std::ops::{Index, IndexMut, Range};

use num_traits::{Float, Zero};

use crate::scalar::{RealScalar, Scalar};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// First `cols` columns of the `rows`-dimensional identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T::Real]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = T::from_real(d);
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data, convenient for literals.
    pub fn from_row_major(rows: usize, cols: usize, data: &[T]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Self::from_fn(rows, cols, |i, j| data[i * cols + j])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows);
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols);
        Self {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn rows_range(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.rows);
        Self::from_fn(range.len(), self.cols, |i, j| self[(range.start + i, j)])
    }

    /// Horizontal concatenation; all blocks must share the row count.
    pub fn hcat(rows: usize, blocks: &[&DenseMatrix<T>]) -> Self {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.rows, rows, "hcat: row count mismatch");
            data.extend_from_slice(&b.data);
        }
        Self { rows, cols, data }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// `self * rhs` with fixed left-to-right accumulation.
    pub fn mul(&self, rhs: &DenseMatrix<T>) -> Self {
        assert_eq!(self.cols, rhs.rows, "mul: inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let oc = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for p in 0..self.cols {
                let b = rhs[(p, j)];
                if b == T::zero() {
                    continue;
                }
                let ac = &self.data[p * self.rows..(p + 1) * self.rows];
                for (o, &a) in oc.iter_mut().zip(ac) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^* * rhs`.
    pub fn adjoint_mul(&self, rhs: &DenseMatrix<T>) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul: row count mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for j in 0..rhs.cols {
            let b = rhs.col(j);
            for i in 0..self.cols {
                out[(i, j)] = dot(self.col(i), b);
            }
        }
        out
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[T::Real]) -> Self {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for (j, &s) in d.iter().enumerate() {
            for v in out.col_mut(j) {
                *v = v.scale(s);
            }
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn sub(&self, rhs: &DenseMatrix<T>) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &DenseMatrix<T>) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T::Real {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T::Real {
        self.data
            .iter()
            .fold(T::Real::zero(), |m, v| Float::max(m, v.modulus()))
    }

    pub fn column_norms(&self) -> Vec<T::Real> {
        (0..self.cols).map(|j| norm2(self.col(j))).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `(M + M^*) / 2`; diagonal forced real.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        let half = T::Real::from_f64(0.5);
        let mut out = self.clone();
        for j in 0..self.cols {
            out[(j, j)] = T::from_real(self[(j, j)].re());
            for i in 0..j {
                let v = (self[(i, j)] + self[(j, i)].conj()).scale(half);
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    /// `‖M − M^*‖_F`.
    pub fn hermitian_defect(&self) -> T::Real {
        assert!(self.is_square());
        let mut acc = T::Real::zero();
        for j in 0..self.cols {
            for i in 0..self.rows {
                acc += (self[(i, j)] - self[(j, i)].conj()).abs_sqr();
            }
        }
        acc.sqrt()
    }

    /// Symmetry check at the working tolerance `8·u·rows·max|M|`.
    pub fn is_hermitian(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let tol = T::Real::from_f64(8.0)
            * T::Real::UNIT_ROUNDOFF
            * T::Real::from_usize(self.rows)
            * self.max_abs();
        self.hermitian_defect() <= tol
    }

    /// `‖M^* M − I‖_F`.
    pub fn orthonormality_defect(&self) -> T::Real {
        let g = self.adjoint_mul(self);
        let mut acc = T::Real::zero();
        for j in 0..g.cols {
            for i in 0..g.rows {
                let e = if i == j { g[(i, j)] - T::one() } else { g[(i, j)] };
                acc += e.abs_sqr();
            }
        }
        acc.sqrt()
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// `x^* y`, accumulated left to right.
#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        acc += a.conj() * b;
    }
    acc
}

/// Euclidean norm with scaling against overflow/underflow.
pub fn norm2<T: Scalar>(x: &[T]) -> T::Real {
    let scale = x
        .iter()
        .fold(T::Real::zero(), |m, v| Float::max(m, v.modulus()));
    if scale == T::Real::zero() || !scale.is_finite() {
        return scale;
    }
    let inv = scale.recip();
    let mut acc = T::Real::zero();
    for v in x {
        acc += v.scale(inv).abs_sqr();
    }
    scale * acc.sqrt()
}

/// `y -= a * x`.
#[inline]
pub fn axpy_neg<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi -= a * xi;
    }
}
