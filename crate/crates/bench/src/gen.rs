//! Test-matrix generators: 2D Laplacian and dense kernel matrices.

use std::f64::consts::PI;

use mplobpcg::dense::{dense_cholesky, DenseMatrix};
use mplobpcg::sparse::CsrMatrix;
use mplobpcg::{PrecisionTag, Scalar};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Five-point finite-difference Laplacian on an `nx × ny` grid with
/// Dirichlet boundaries; unknown `(i, j)` has index `i + nx·j`.
pub fn laplace2d(nx: usize, ny: usize) -> CsrMatrix<f64> {
    let idx = |i: usize, j: usize| i + nx * j;
    let mut t = Vec::with_capacity(5 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = idx(i, j);
            t.push((p, p, 4.0));
            if i + 1 < nx {
                t.push((p, idx(i + 1, j), -1.0));
                t.push((idx(i + 1, j), p, -1.0));
            }
            if j + 1 < ny {
                t.push((p, idx(i, j + 1), -1.0));
                t.push((idx(i, j + 1), p, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(nx * ny, &t).expect("grid pattern is symmetric")
}

/// All eigenvalues of [`laplace2d`], ascending.
pub fn laplace2d_eigenvalues(nx: usize, ny: usize) -> Vec<f64> {
    let s = |i: usize, m: usize| {
        let v = (i as f64 * PI / (2.0 * (m as f64 + 1.0))).sin();
        4.0 * v * v
    };
    let mut ev: Vec<f64> = (1..=nx)
        .flat_map(|i| (1..=ny).map(move |j| s(i, nx) + s(j, ny)))
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(−‖x − y‖₂ / 2)`.
    Gaussian,
    /// `(xᵀy + 1)³`.
    Polynomial,
}

impl KernelKind {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelKind::Gaussian => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-0.5 * d2.sqrt()).exp()
            }
            KernelKind::Polynomial => {
                let d: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (d + 1.0).powi(3)
            }
        }
    }
}

/// A generated matrix and the diagonal shift needed to make it numerically
/// positive definite (zero when none was needed).
#[derive(Debug, Clone)]
pub struct Generated<T: Scalar> {
    pub matrix: DenseMatrix<T>,
    pub shift: f64,
}

fn uniform_points(n: usize, rng: &mut Pcg64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()
}

/// Adds the smallest shift `10^j · 10·n·u·max|K_ii|` (j = 0, 1, …) under which
/// a working-precision Cholesky factorization succeeds.
fn regularize<T: Scalar<Real = f64>>(mut k: DenseMatrix<T>) -> Generated<T> {
    if dense_cholesky(&k).is_ok() {
        return Generated { matrix: k, shift: 0.0 };
    }
    let n = k.nrows();
    let scale = (0..n).map(|i| k[(i, i)].re().abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut shift = 10.0 * n as f64 * PrecisionTag::Working.unit_roundoff() * scale;
    let base = k.clone();
    loop {
        for i in 0..n {
            k[(i, i)] = base[(i, i)] + T::from_real(shift);
        }
        if dense_cholesky(&k).is_ok() {
            return Generated { matrix: k, shift };
        }
        shift *= 10.0;
    }
}

/// `K_ij = k(x_i, x_j)` for `n` seeded uniform points in `[0, 1)^n`.
pub fn kernel(kind: KernelKind, n: usize, seed: u64) -> Generated<f64> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let x = uniform_points(n, &mut rng);
    regularize(DenseMatrix::from_fn(n, n, |i, j| kind.eval(&x[i], &x[j])))
}

/// `K_ij = k(x_i, x_j) + k(y_i, y_j) + i(k(x_i, y_j) − k(y_i, x_j))`.
pub fn complex_kernel(kind: KernelKind, n: usize, seed: u64) -> Generated<Complex64> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let x = uniform_points(n, &mut rng);
    let y = uniform_points(n, &mut rng);
    regularize(DenseMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            kind.eval(&x[i], &x[j]) + kind.eval(&y[i], &y[j]),
            kind.eval(&x[i], &y[j]) - kind.eval(&y[i], &x[j]),
        )
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grids() {
        let a = laplace2d(2, 1);
        assert_eq!(a.to_dense(), DenseMatrix::from_row_major(2, 2, &[4.0, -1.0, -1.0, 4.0]));
        let ev = laplace2d_eigenvalues(2, 1);
        assert!((ev[0] - 3.0).abs() < 1e-14 && (ev[1] - 5.0).abs() < 1e-14);
        assert_eq!(laplace2d(1, 1).to_dense(), DenseMatrix::from_row_major(1, 1, &[4.0]));
    }

    #[test]
    fn nnz_formula() {
        for (nx, ny) in [(1, 1), (3, 7), (10, 2), (6, 6)] {
            assert_eq!(laplace2d(nx, ny).nnz(), 5 * nx * ny - 2 * nx - 2 * ny);
        }
    }

    #[test]
    fn kernels_are_deterministic() {
        let a = kernel(KernelKind::Gaussian, 32, 4);
        let b = kernel(KernelKind::Gaussian, 32, 4);
        assert_eq!(a.matrix, b.matrix);
        assert_ne!(a.matrix, kernel(KernelKind::Gaussian, 32, 5).matrix);
    }

    #[test]
    fn gaussian_diagonal_is_one() {
        let g = kernel(KernelKind::Gaussian, 40, 1);
        assert_eq!(g.shift, 0.0);
        assert!((0..40).all(|i| g.matrix[(i, i)] == 1.0));
    }

    #[test]
    fn complex_kernel_is_exactly_hermitian() {
        for kind in [KernelKind::Gaussian, KernelKind::Polynomial] {
            let k = complex_kernel(kind, 24, 2).matrix;
            assert_eq!(k, k.adjoint());
        }
    }

    #[test]
    fn semidefinite_input_gets_recorded_shift() {
        let ones = DenseMatrix::<f64>::from_fn(5, 5, |_, _| 1.0);
        let g = regularize(ones);
        assert!(g.shift > 0.0);
        assert!(dense_cholesky(&g.matrix).is_ok());
    }
}
