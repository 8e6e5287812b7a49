//! Full eigendecomposition of small Hermitian matrices.
//!
//! Householder reduction to tridiagonal form, a diagonal phase scaling that
//! makes the off-diagonal real, then implicit QL with Wilkinson-type shifts.

use num_traits::{Float, One, Zero};

use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

#[derive(Debug, Clone)]
pub struct EigDecomposition<T: Scalar> {
    /// Eigenvalues in non-decreasing order.
    pub values: Vec<T::Real>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: DenseMatrix<T>,
}

/// Eigendecomposition of a Hermitian matrix; the strictly upper triangle is
/// ignored in favour of the Hermitian part.
pub fn small_herm_eig<T: Scalar>(m: &DenseMatrix<T>) -> Result<EigDecomposition<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenproblem needs a square matrix".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(EigDecomposition {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    let (mut d, mut e, mut z) = tridiagonalize(&m.hermitian_part());
    tql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    Ok(EigDecomposition {
        values,
        vectors: z.select_columns(&order),
    })
}

/// Returns `(diag, offdiag, Z)` with `M = Z T Z^*`, `T` real symmetric
/// tridiagonal and `offdiag[k] = T(k+1, k)`.
fn tridiagonalize<T: Scalar>(m: &DenseMatrix<T>) -> (Vec<T::Real>, Vec<T::Real>, DenseMatrix<T>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut q = DenseMatrix::<T>::identity(n);
    let two = T::Real::from_f64(2.0);

    for k in 0..n.saturating_sub(2) {
        let x: Vec<T> = a.col(k)[k + 1..].to_vec();
        let alpha = norm2(&x);
        if alpha == T::Real::zero() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.modulus() == T::Real::zero() {
            T::one()
        } else {
            x0.scale(x0.modulus().recip())
        };
        let mut v = x;
        v[0] += phase.scale(alpha);
        let vv = dot(&v, &v).re();
        if vv == T::Real::zero() {
            continue;
        }
        let beta = two / vv;
        let off = k + 1;

        // A <- H A
        for j in 0..n {
            let col = &mut a.col_mut(j)[off..];
            let w = dot(&v, col).scale(beta);
            for (c, &vi) in col.iter_mut().zip(&v) {
                *c -= vi * w;
            }
        }
        // A <- A H and Q <- Q H
        for mat in [&mut a, &mut q] {
            let rows = mat.nrows();
            let mut w = vec![T::zero(); rows];
            for (p, &vp) in v.iter().enumerate() {
                let cp = mat.col(off + p);
                for (wi, &c) in w.iter_mut().zip(cp) {
                    *wi += c * vp;
                }
            }
            for (p, &vp) in v.iter().enumerate() {
                let f = vp.conj().scale(beta);
                let cp = mat.col_mut(off + p);
                for (c, &wi) in cp.iter_mut().zip(&w) {
                    *c -= wi * f;
                }
            }
        }
    }

    let diag: Vec<T::Real> = (0..n).map(|i| a[(i, i)].re()).collect();
    let mut offdiag = vec![T::Real::zero(); n];
    let mut phase = T::one();
    for j in 1..n {
        let ek = a[(j, j - 1)];
        let mag = ek.modulus();
        if mag != T::Real::zero() {
            phase = phase * ek.scale(mag.recip());
        }
        offdiag[j - 1] = mag;
        for v in q.col_mut(j) {
            *v *= phase;
        }
    }
    (diag, offdiag, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix, accumulating the
/// rotations into the columns of `z`. Caps the total at `30 n` QL sweeps.
fn tql<T: Scalar>(d: &mut [T::Real], e: &mut [T::Real], z: &mut DenseMatrix<T>) -> Result<()> {
    let n = d.len();
    let eps = T::Real::epsilon();
    let cap = 30 * n;
    let mut sweeps = 0usize;
    let zero = T::Real::zero();
    let one = T::Real::one();
    let two = T::Real::from_f64(2.0);
    let rows = z.nrows();

    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(Error::NoConvergence { sweeps: cap });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(one);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (one, one, zero);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == zero {
                    d[i + 1] -= p;
                    e[m] = zero;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let data = z.as_mut_slice();
                let (left, right) = data.split_at_mut((i + 1) * rows);
                let zi = &mut left[i * rows..];
                let zi1 = &mut right[..rows];
                for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let f = *b;
                    *b = a.scale(s) + f.scale(c);
                    *a = a.scale(c) - f.scale(s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = zero;
        }
    }
    Ok(())
}
