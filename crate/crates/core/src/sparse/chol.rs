//! Up-looking sparse Cholesky with elimination-tree symbolic analysis.
//!
//! The factor `L` is kept in compressed-column form with the diagonal entry
//! first in every column. Row `k` of `L` is produced at step `k` by a sparse
//! triangular solve whose pattern is the elimination-tree reach of row `k`
//! of the (permuted) matrix.

use num_traits::{Float, Zero};

use super::csr::{inverse_permutation, CsrMatrix};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Pattern-only analysis of `C = Π^*AΠ`, shared between precisions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicChol {
    n: usize,
    parent: Vec<Option<usize>>,
    col_ptr: Vec<usize>,
}

impl SymbolicChol {
    /// Elimination tree and column counts of the Cholesky factor of `c`.
    pub fn analyze<T: Scalar>(c: &CsrMatrix<T>) -> Self {
        let n = c.n();
        let parent = etree(c);
        let mut counts = vec![1usize; n];
        let mut reach = Reach::new(n);
        for k in 0..n {
            for &i in reach.row_pattern(c, &parent, k) {
                counts[i] += 1;
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for k in 0..n {
            col_ptr.push(col_ptr[k] + counts[k]);
        }
        Self { n, parent, col_ptr }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of entries of `L`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.col_ptr[self.n]
    }

    pub fn etree(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Numeric up-looking factorization of `c`, which must have the analyzed pattern.
    pub fn factor<T: Scalar>(&self, c: &CsrMatrix<T>) -> Result<(Vec<usize>, Vec<T>)> {
        let n = self.n;
        if c.n() != n {
            return Err(Error::DimensionMismatch("matrix does not match the symbolic analysis".into()));
        }
        let nnz = self.nnz();
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![T::zero(); nnz];
        let mut next: Vec<usize> = self.col_ptr[..n].to_vec();
        let mut x = vec![T::zero(); n];
        let mut reach = Reach::new(n);

        for k in 0..n {
            // scatter the upper part of column k: C(j, k) = conj(C(k, j)), j <= k
            let (cols, vals) = c.row(k);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= k {
                    x[j] = v.conj();
                }
            }
            let mut d = x[k].re();
            x[k] = T::zero();
            for &i in reach.row_pattern(c, &self.parent, k) {
                let lii = values[self.col_ptr[i]];
                let y = x[i] / lii;
                x[i] = T::zero();
                for p in self.col_ptr[i] + 1..next[i] {
                    x[row_idx[p]] -= values[p] * y;
                }
                d -= y.abs_sqr();
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = y.conj();
            }
            if !d.is_finite() {
                return Err(Error::Overflow {
                    index: k,
                    value: d.to_f64(),
                });
            }
            if !(d > T::Real::zero()) {
                return Err(Error::NotPositiveDefinite {
                    index: k,
                    pivot: d.to_f64(),
                });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = T::from_real(d.sqrt());
        }
        debug_assert!((0..n).all(|j| next[j] == self.col_ptr[j + 1]));
        Ok((row_idx, values))
    }
}

/// Elimination tree from the lower pattern of each row (upper pattern of each column).
fn etree<T: Scalar>(c: &CsrMatrix<T>) -> Vec<Option<usize>> {
    let n = c.n();
    let mut parent = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for k in 0..n {
        for &j in c.row(k).0 {
            if j >= k {
                break;
            }
            let mut i = Some(j);
            while let Some(node) = i {
                if node >= k {
                    break;
                }
                let next = ancestor[node];
                ancestor[node] = Some(k);
                if next.is_none() {
                    parent[node] = Some(k);
                }
                i = next;
            }
        }
    }
    parent
}

/// Scratch space for the row-pattern (`ereach`) traversal.
struct Reach {
    mark: Vec<usize>,
    stack: Vec<usize>,
    path: Vec<usize>,
}

impl Reach {
    fn new(n: usize) -> Self {
        Self {
            mark: vec![usize::MAX; n],
            stack: vec![0; n],
            path: Vec::with_capacity(n),
        }
    }

    /// Nonzero columns of row `k` of `L` (diagonal excluded) in topological order.
    fn row_pattern<T: Scalar>(&mut self, c: &CsrMatrix<T>, parent: &[Option<usize>], k: usize) -> &[usize] {
        let n = self.stack.len();
        let mut top = n;
        self.mark[k] = k;
        for &j in c.row(k).0 {
            if j >= k {
                break;
            }
            self.path.clear();
            let mut i = j;
            while self.mark[i] != k {
                self.path.push(i);
                self.mark[i] = k;
                match parent[i] {
                    Some(p) => i = p,
                    None => break,
                }
            }
            while let Some(v) = self.path.pop() {
                top -= 1;
                self.stack[top] = v;
            }
        }
        &self.stack[top..]
    }
}

/// Sparse Cholesky factor `Π^* A Π = L L^*`.
#[derive(Debug, Clone)]
pub struct SparseChol<T: Scalar> {
    perm: Vec<usize>,
    symbolic: SymbolicChol,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

/// Factor `A` under the ordering `perm` (`perm[new] = old`).
pub fn sparse_cholesky<T: Scalar>(a: &CsrMatrix<T>, perm: &[usize]) -> Result<SparseChol<T>> {
    let c = a.permute(perm)?;
    let symbolic = SymbolicChol::analyze(&c);
    SparseChol::from_permuted(&c, perm.to_vec(), symbolic)
}

impl<T: Scalar> SparseChol<T> {
    /// Numeric phase on an already permuted matrix `c = Π^*AΠ`.
    pub fn from_permuted(c: &CsrMatrix<T>, perm: Vec<usize>, symbolic: SymbolicChol) -> Result<Self> {
        inverse_permutation(&perm, c.n())?;
        let (row_idx, values) = symbolic.factor(c)?;
        Ok(Self {
            perm,
            symbolic,
            row_idx,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.symbolic.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn etree(&self) -> &[Option<usize>] {
        self.symbolic.etree()
    }

    pub fn nnz_l(&self) -> usize {
        self.values.len()
    }

    pub fn symbolic(&self) -> &SymbolicChol {
        &self.symbolic
    }

    /// `L` as a dense lower-triangular matrix.
    pub fn l_dense(&self) -> DenseMatrix<T> {
        let n = self.n();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for p in self.symbolic.col_ptr[j]..self.symbolic.col_ptr[j + 1] {
                l[(self.row_idx[p], j)] = self.values[p];
            }
        }
        l
    }

    /// `L` in compressed-row form (its CSR is the transpose pattern of the stored CSC).
    pub fn l_rows(&self) -> (Vec<usize>, Vec<usize>, Vec<T>) {
        let n = self.n();
        let mut counts = vec![0usize; n + 1];
        for &r in &self.row_idx {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.values.len()];
        let mut vals = vec![T::zero(); self.values.len()];
        for j in 0..n {
            for p in self.symbolic.col_ptr[j]..self.symbolic.col_ptr[j + 1] {
                let r = self.row_idx[p];
                cols[next[r]] = j;
                vals[next[r]] = self.values[p];
                next[r] += 1;
            }
        }
        (counts, cols, vals)
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n();
        let cp = &self.symbolic.col_ptr;
        // L y = x
        for j in 0..n {
            let yj = x[j] / self.values[cp[j]];
            x[j] = yj;
            if yj != T::zero() {
                for p in cp[j] + 1..cp[j + 1] {
                    x[self.row_idx[p]] -= self.values[p] * yj;
                }
            }
        }
        // L^* z = y
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in cp[j] + 1..cp[j + 1] {
                s -= self.values[p].conj() * x[self.row_idx[p]];
            }
            x[j] = s / self.values[cp[j]];
        }
    }

    /// `Π L^{-*} L^{-1} Π^* B` when `apply_perm`, otherwise `L^{-*} L^{-1} B`.
    pub fn solve(&self, b: &DenseMatrix<T>, apply_perm: bool) -> Result<DenseMatrix<T>> {
        let n = self.n();
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "factor of dimension {n} applied to a block with {} rows",
                b.nrows()
            )));
        }
        let cp = &self.symbolic.col_ptr;
        for j in 0..n {
            let d = self.values[cp[j]];
            if d == T::zero() || d.modulus() < T::Real::min_positive_value() {
                return Err(Error::SingularTriangular { index: j });
            }
        }
        let mut out = DenseMatrix::zeros(n, b.ncols());
        let mut work = vec![T::zero(); n];
        for c in 0..b.ncols() {
            let bc = b.col(c);
            if apply_perm {
                for (w, &old) in work.iter_mut().zip(&self.perm) {
                    *w = bc[old];
                }
            } else {
                work.copy_from_slice(bc);
            }
            self.solve_in_place(&mut work);
            let oc = out.col_mut(c);
            if apply_perm {
                for (&w, &old) in work.iter().zip(&self.perm) {
                    oc[old] = w;
                }
            } else {
                oc.copy_from_slice(&work);
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`SparseChol::solve`].
pub fn sparse_tri_solve<T: Scalar>(f: &SparseChol<T>, b: &DenseMatrix<T>, apply_perm: bool) -> Result<DenseMatrix<T>> {
    f.solve(b, apply_perm)
}
