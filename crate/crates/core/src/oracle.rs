//! Reference implementations and test-matrix generators that share no code
//! path with the production kernels. Compiled for tests and behind the
//! `oracle` feature.

use num_traits::Float;
use rand::SeedableRng;
use rand_pcg::Pcg64;

use crate::dense::DenseMatrix;
use crate::scalar::{RealScalar, Scalar};

/// Textbook triple-loop product.
pub fn naive_matmul<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    assert_eq!(a.ncols(), b.nrows());
    DenseMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        let mut s = T::zero();
        for p in 0..a.ncols() {
            s += a[(i, p)] * b[(p, j)];
        }
        s
    })
}

/// Modified Gram–Schmidt applied twice; columns must be independent.
pub fn mgs2<T: Scalar>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut q = a.clone();
    let rows = q.nrows();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for p in 0..j {
                let mut s = T::zero();
                for i in 0..rows {
                    s += q[(i, p)].conj() * q[(i, j)];
                }
                for i in 0..rows {
                    let v = q[(i, p)];
                    q[(i, j)] -= v * s;
                }
            }
        }
        let nrm = q.col(j).iter().map(|v| v.abs_sqr()).sum::<T::Real>().sqrt();
        for v in q.col_mut(j) {
            *v = v.scale(nrm.recip());
        }
    }
    q
}

/// `U diag(σ) V^*` with Haar-like `U`, `V` and singular values spaced
/// geometrically from 1 down to `1/kappa`.
pub fn with_condition<T: Scalar>(rows: usize, cols: usize, kappa: f64, seed: u64) -> DenseMatrix<T> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let u = mgs2(&DenseMatrix::<T>::from_fn(rows, cols, |_, _| T::sample_normal(&mut rng)));
    let v = mgs2(&DenseMatrix::<T>::from_fn(cols, cols, |_, _| T::sample_normal(&mut rng)));
    let sigma: Vec<T::Real> = (0..cols)
        .map(|j| {
            let t = if cols > 1 { j as f64 / (cols - 1) as f64 } else { 0.0 };
            T::Real::from_f64(kappa.powf(-t))
        })
        .collect();
    naive_matmul(&u.scale_columns(&sigma), &v.adjoint())
}

/// Random real SPD matrix `Q diag(λ) Q^T` with eigenvalues spaced
/// geometrically over `[1, kappa]`; returns the matrix and its spectrum.
pub fn random_spd(n: usize, kappa: f64, seed: u64) -> (DenseMatrix<f64>, Vec<f64>) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let q = mgs2(&DenseMatrix::<f64>::from_fn(n, n, |_, _| f64::sample_normal(&mut rng)));
    let lambda: Vec<f64> = (0..n)
        .map(|j| if n > 1 { kappa.powf(j as f64 / (n - 1) as f64) } else { 1.0 })
        .collect();
    let a = naive_matmul(&q.scale_columns(&lambda), &q.adjoint()).hermitian_part();
    (a, lambda)
}

/// Givens reduction of a real symmetric matrix to tridiagonal form.
pub fn givens_tridiagonal(a: &DenseMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (a[(i, j)] + a[(j, i)])).collect()).collect();
    for j in 0..n.saturating_sub(2) {
        for i in j + 2..n {
            let x = m[j + 1][j];
            let y = m[i][j];
            if y == 0.0 {
                continue;
            }
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            // rows j+1, i
            for k in 0..n {
                let (p, q) = (m[j + 1][k], m[i][k]);
                m[j + 1][k] = c * p + s * q;
                m[i][k] = -s * p + c * q;
            }
            // columns j+1, i
            for row in m.iter_mut() {
                let (p, q) = (row[j + 1], row[i]);
                row[j + 1] = c * p + s * q;
                row[i] = -s * p + c * q;
            }
        }
    }
    let d = (0..n).map(|i| m[i][i]).collect();
    let e = (0..n.saturating_sub(1)).map(|i| m[i + 1][i]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal `(d, e)` strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1e-300);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues, ascending, by Givens tridiagonalization and Sturm bisection.
pub fn sturm_eigenvalues(a: &DenseMatrix<f64>) -> Vec<f64> {
    let (d, e) = givens_tridiagonal(a);
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(&d, &e, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvalues of the 5-point Dirichlet Laplacian on an `nx × ny` grid, ascending.
pub fn laplace2d_spectrum(nx: usize, ny: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(nx * ny);
    for i in 1..=nx {
        for j in 1..=ny {
            let a = (i as f64 * std::f64::consts::PI / (2.0 * (nx + 1) as f64)).sin();
            let b = (j as f64 * std::f64::consts::PI / (2.0 * (ny + 1) as f64)).sin();
            v.push(4.0 * a * a + 4.0 * b * b);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}
