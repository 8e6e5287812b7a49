use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::precision::to_lower_slice;
use crate::scalar::{RealScalar, Scalar, WorkingScalar};

/// Hermitian matrix in compressed sparse row form, full pattern stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Validates structure and Hermitian symmetry (pattern and conjugate values).
    pub fn try_new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let m = Self::try_new_structure(n, row_ptr, col_idx, values)?;
        m.check_hermitian()?;
        Ok(m)
    }

    fn try_new_structure(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if row_ptr.len() != n + 1 {
            return Err(Error::InvalidSparse(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n + 1
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::InvalidSparse("row_ptr does not bracket the entries".into()));
        }
        for i in 0..n {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidSparse(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.iter().any(|&c| c >= n) {
                return Err(Error::InvalidSparse(format!("column index out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSparse(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    fn check_hermitian(&self) -> Result<()> {
        for i in 0..self.n {
            for (&j, &v) in self.row(i).0.iter().zip(self.row(i).1) {
                match self.get(j, i) {
                    Some(w) if w == v.conj() => {}
                    Some(_) => {
                        return Err(Error::NotHermitian(format!(
                            "entry ({i},{j}) is not the conjugate of ({j},{i})"
                        )))
                    }
                    None => {
                        return Err(Error::NotHermitian(format!(
                            "entry ({i},{j}) present but ({j},{i}) missing"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds from `(row, col, value)` triplets covering the full pattern;
    /// duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        if let Some(&(i, j, _)) = sorted.iter().find(|t| t.0 >= n || t.1 >= n) {
            return Err(Error::InvalidSparse(format!("entry ({i},{j}) outside {n}x{n}")));
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self::try_new(n, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Takes the Hermitian part of a dense matrix, dropping exact zeros.
    pub fn from_dense(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("sparse conversion needs a square matrix".into()));
        }
        let n = a.nrows();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)];
                if v != T::zero() {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &triplets)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|p| vals[p])
    }

    /// Off-diagonal degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.row(i).0.iter().filter(|&&j| j != i).count())
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::dense::norm2(&self.values).to_f64()
    }

    /// `A X` with row-wise accumulation in column order.
    pub fn spmv_block(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if x.nrows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "sparse operator of dimension {} applied to a block with {} rows",
                self.n,
                x.nrows()
            )));
        }
        let mut out = DenseMatrix::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.col(c);
            let oc = out.col_mut(c);
            for (i, o) in oc.iter_mut().enumerate() {
                let (cols, vals) = self.row(i);
                let mut acc = T::zero();
                for (&j, &v) in cols.iter().zip(vals) {
                    acc += v * xc[j];
                }
                *o = acc;
            }
        }
        Ok(out)
    }

    /// Symmetric permutation `B = Π^* A Π` with `B(i, j) = A(perm[i], perm[j])`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let inv = inverse_permutation(perm, self.n)?;
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut buf: Vec<(usize, T)> = Vec::new();
        for &old in perm {
            let (cols, vals) = self.row(old);
            buf.clear();
            buf.extend(cols.iter().zip(vals).map(|(&j, &v)| (inv[j], v)));
            buf.sort_by_key(|e| e.0);
            for &(j, v) in &buf {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Adds `shift` to every diagonal entry; the diagonal must be stored.
    pub fn shift_diagonal(&self, shift: T::Real) -> Result<Self> {
        let mut out = self.clone();
        for i in 0..self.n {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            match self.col_idx[r.clone()].binary_search(&i) {
                Ok(p) => out.values[r.start + p] += T::from_real(shift),
                Err(_) => return Err(Error::InvalidSparse(format!("diagonal entry {i} not stored"))),
            }
        }
        Ok(out)
    }
}

impl<W: WorkingScalar> CsrMatrix<W> {
    pub fn to_lower(&self) -> Result<CsrMatrix<W::Lower>> {
        Ok(CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: to_lower_slice(&self.values)?,
        })
    }
}

pub(crate) fn inverse_permutation(perm: &[usize], n: usize) -> Result<Vec<usize>> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for dimension {n}",
            perm.len()
        )));
    }
    let mut inv = vec![usize::MAX; n];
    for (new, &old) in perm.iter().enumerate() {
        if old >= n || inv[old] != usize::MAX {
            return Err(Error::InvalidSparse("not a permutation".into()));
        }
        inv[old] = new;
    }
    Ok(inv)
}
