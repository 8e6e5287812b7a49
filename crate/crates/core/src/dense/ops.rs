use num_traits::{Float, Zero};

use super::matrix::{axpy_neg, dot, norm2, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Orthonormality tolerance for working-precision checks.
pub const TOL_ORTH: f64 = 1e-10;
/// Relative eigen-residual tolerance for working-precision checks.
pub const TOL_EIG: f64 = 1e-12;

/// `A * X` for square Hermitian `A`.
pub fn herm_product<T: Scalar>(a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} columns but block has {} rows",
            a.ncols(),
            x.nrows()
        )));
    }
    Ok(a.mul(x))
}

/// `(x^* A x) / (x^* x)`, returned as a real number.
pub fn rayleigh_quotient<T: Scalar>(a: &DenseMatrix<T>, x: &[T]) -> Result<T::Real> {
    if a.ncols() != x.len() || !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} vs vector of length {}",
            a.nrows(),
            a.ncols(),
            x.len()
        )));
    }
    let xx = dot(x, x).re();
    if xx == T::Real::zero() {
        return Err(Error::ZeroVector);
    }
    let xm = DenseMatrix::from_col_major(x.len(), 1, x.to_vec());
    let ax = a.mul(&xm);
    Ok(dot(x, ax.col(0)).re() / xx)
}

#[derive(Debug, Clone)]
pub struct BlockRayleigh<T> {
    /// `X^* A X`, symmetrized.
    pub theta: DenseMatrix<T>,
    /// False when `‖X^*X − I‖_F` exceeded [`TOL_ORTH`]; the product is still formed.
    pub orthonormal: bool,
}

/// `Θ = X^* A X` for a block with orthonormal columns.
pub fn block_rayleigh<T: Scalar>(a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<BlockRayleigh<T>> {
    let ax = herm_product(a, x)?;
    let orthonormal = x.orthonormality_defect().to_f64() <= orth_tol::<T>();
    Ok(BlockRayleigh {
        theta: x.adjoint_mul(&ax).hermitian_part(),
        orthonormal,
    })
}

/// Orthonormality tolerance scaled for the scalar's precision.
pub(crate) fn orth_tol<T: Scalar>() -> f64 {
    TOL_ORTH * (T::Real::UNIT_ROUNDOFF.to_f64() / f64::UNIT_ROUNDOFF)
}

/// Lower-triangular Cholesky factor `A = L L^*`, computed column by column.
pub fn dense_cholesky<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("Cholesky needs a square matrix".into()));
    }
    let n = a.nrows();
    let mut l = DenseMatrix::<T>::zeros(n, n);
    for j in 0..n {
        // column j of L below and on the diagonal: a(j:, j) - L(j:, 0:j) L(j, 0:j)^*
        let mut colj: Vec<T> = (j..n).map(|i| a[(i, j)]).collect();
        for p in 0..j {
            let ljp = l[(j, p)].conj();
            if ljp == T::zero() {
                continue;
            }
            let lp = &l.col(p)[j..];
            axpy_neg(ljp, lp, &mut colj);
        }
        let d = colj[0].re();
        if !(d > T::Real::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: d.to_f64(),
            });
        }
        let s = d.sqrt();
        let inv = s.recip();
        let lc = l.col_mut(j);
        lc[j] = T::from_real(s);
        for (dst, v) in lc[j + 1..].iter_mut().zip(&colj[1..]) {
            *dst = v.scale(inv);
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriMode {
    /// Solve `L X = B`, `L` lower triangular.
    Forward,
    /// Solve `L^* X = B`, `L` lower triangular.
    BackwardAdjoint,
    /// Compute `B U^{-1}`, `U` upper triangular.
    UpperInverseRight,
}

/// Triangular solves; only the relevant triangle of `t` is read.
pub fn tri_solve<T: Scalar>(t: &DenseMatrix<T>, b: &DenseMatrix<T>, mode: TriMode) -> Result<DenseMatrix<T>> {
    let n = t.nrows();
    if !t.is_square() {
        return Err(Error::DimensionMismatch("triangular factor must be square".into()));
    }
    for i in 0..n {
        let d = t[(i, i)];
        if d == T::zero() || d.modulus() < T::Real::min_positive_value() || !d.all_finite() {
            return Err(Error::SingularTriangular { index: i });
        }
    }
    match mode {
        TriMode::Forward | TriMode::BackwardAdjoint => {
            if b.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "factor is {n}x{n}, right-hand side has {} rows",
                    b.nrows()
                )));
            }
            let mut x = b.clone();
            for c in 0..x.ncols() {
                let xc = x.col_mut(c);
                if mode == TriMode::Forward {
                    lower_solve_in_place(t, xc);
                } else {
                    lower_adjoint_solve_in_place(t, xc);
                }
            }
            Ok(x)
        }
        TriMode::UpperInverseRight => {
            if b.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "factor is {n}x{n}, left operand has {} columns",
                    b.ncols()
                )));
            }
            // X U = B, column j: X(:,j) = (B(:,j) - sum_{p<j} X(:,p) U(p,j)) / U(j,j)
            let mut x = b.clone();
            let rows = b.nrows();
            for j in 0..n {
                for p in 0..j {
                    let u = t[(p, j)];
                    if u == T::zero() {
                        continue;
                    }
                    let (done, rest) = x.as_mut_slice().split_at_mut(j * rows);
                    axpy_neg(u, &done[p * rows..(p + 1) * rows], &mut rest[..rows]);
                }
                let d = t[(j, j)];
                for v in x.col_mut(j) {
                    *v = *v / d;
                }
            }
            Ok(x)
        }
    }
}

pub(crate) fn lower_solve_in_place<T: Scalar>(l: &DenseMatrix<T>, x: &mut [T]) {
    let n = l.nrows();
    for j in 0..n {
        let xj = x[j] / l[(j, j)];
        x[j] = xj;
        if xj != T::zero() {
            axpy_neg(xj, &l.col(j)[j + 1..], &mut x[j + 1..]);
        }
    }
}

pub(crate) fn lower_adjoint_solve_in_place<T: Scalar>(l: &DenseMatrix<T>, x: &mut [T]) {
    let n = l.nrows();
    for j in (0..n).rev() {
        let s = dot(&l.col(j)[j + 1..], &x[j + 1..]);
        x[j] = (x[j] - s) / l[(j, j)].conj();
    }
}

/// Relative Frobenius distance `‖a − b‖_F / ‖b‖_F` (absolute when `b = 0`).
pub fn rel_error<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> f64 {
    let d = norm2(a.sub(b).as_slice()).to_f64();
    let s = norm2(b.as_slice()).to_f64();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    fn random_herm(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = Pcg64::seed_from_u64(seed);
        let g = DenseMatrix::from_fn(n, n, |_, _| f64::sample_normal(&mut rng));
        g.add(&g.adjoint())
    }

    fn naive_product(a: &DenseMatrix<f64>, x: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        let mut out = DenseMatrix::zeros(a.nrows(), x.ncols());
        for i in 0..a.nrows() {
            for j in 0..x.ncols() {
                let mut s = 0.0;
                for p in 0..a.ncols() {
                    s += a[(i, p)] * x[(p, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    #[test]
    fn herm_product_examples() {
        let x = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64);
        assert_eq!(herm_product(&DenseMatrix::identity(3), &x).unwrap(), x);

        let d = DenseMatrix::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
        let ones = DenseMatrix::from_col_major(3, 1, vec![1.0; 3]);
        assert_eq!(herm_product(&d, &ones).unwrap().as_slice(), &[1.0, 2.0, 3.0]);

        let a = random_herm(50, 1);
        let mut rng = Pcg64::seed_from_u64(2);
        let x = DenseMatrix::from_fn(50, 5, |_, _| f64::sample_normal(&mut rng));
        assert!(rel_error(&herm_product(&a, &x).unwrap(), &naive_product(&a, &x)) <= 1e-13);

        assert!(matches!(
            herm_product(&a, &DenseMatrix::zeros(3, 1)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rayleigh_quotient_examples() {
        let id = DenseMatrix::<f64>::identity(3);
        assert_eq!(rayleigh_quotient(&id, &[0.3, -2.0, 1.0]).unwrap(), 1.0);
        let d = DenseMatrix::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(rayleigh_quotient(&d, &[0.0, 1.0, 0.0]).unwrap(), 2.0);
        let a = DenseMatrix::from_row_major(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert_eq!(rayleigh_quotient(&a, &[1.0, 1.0]).unwrap(), 3.0);
        assert_eq!(rayleigh_quotient(&a, &[0.0, 0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn rayleigh_quotient_is_real_for_complex() {
        let i = Complex64::new(0.0, 1.0);
        let a = DenseMatrix::from_row_major(
            2,
            2,
            &[Complex64::new(2.0, 0.0), -i, i, Complex64::new(2.0, 0.0)],
        );
        // eigenvector (1, -i)/sqrt2 of eigenvalue 1
        let rq = rayleigh_quotient(&a, &[Complex64::new(1.0, 0.0), -i]).unwrap();
        assert!((rq - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_rayleigh_examples() {
        let a = DenseMatrix::<f64>::from_diagonal(&[5.0, 1.0, 3.0, 2.0]);
        let x = DenseMatrix::eye(4, 2);
        let br = block_rayleigh(&a, &x).unwrap();
        assert!(br.orthonormal);
        assert_eq!(br.theta, DenseMatrix::from_diagonal(&[5.0, 1.0]));

        let skewed = DenseMatrix::from_fn(4, 2, |i, j| if i == j { 2.0 } else { 0.0 });
        assert!(!block_rayleigh(&a, &skewed).unwrap().orthonormal);
    }

    #[test]
    fn block_rayleigh_trace_lower_bound() {
        let a = DenseMatrix::<f64>::from_diagonal(&(1..=10).map(|v| v as f64).collect::<Vec<_>>());
        for seed in 0..10 {
            let mut rng = Pcg64::seed_from_u64(seed);
            let m = 1 + (seed as usize % 5);
            let g = DenseMatrix::from_fn(10, m, |_, _| f64::sample_normal(&mut rng));
            let q = crate::ortho::householder_qr(&g).unwrap().q;
            let t = block_rayleigh(&a, &q).unwrap().theta.trace();
            let bound: f64 = (1..=m).map(|v| v as f64).sum();
            assert!(t >= bound - 1e-12, "trace {t} < {bound}");
        }
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(dense_cholesky(&DenseMatrix::<f64>::identity(3)).unwrap(), DenseMatrix::identity(3));
        let a = DenseMatrix::from_row_major(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let l = dense_cholesky(&a).unwrap();
        assert_eq!(l, DenseMatrix::from_row_major(2, 2, &[2.0, 0.0, 1.0, 2.0]));
        let bad = DenseMatrix::<f64>::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(dense_cholesky(&bad), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn cholesky_reconstructs_complex() {
        let mut rng = Pcg64::seed_from_u64(9);
        let g = DenseMatrix::from_fn(30, 30, |_, _| Complex64::sample_normal(&mut rng));
        let a = g.adjoint_mul(&g).add(&DenseMatrix::identity(30));
        let l = dense_cholesky(&a).unwrap();
        for i in 0..30 {
            assert_eq!(l[(i, i)].im, 0.0);
            assert!(l[(i, i)].re > 0.0);
        }
        assert!(rel_error(&l.mul(&l.adjoint()), &a) < 1e-14);
    }

    #[test]
    fn tri_solve_examples() {
        let b = DenseMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
        assert_eq!(tri_solve(&DenseMatrix::identity(3), &b, TriMode::Forward).unwrap(), b);

        let l = DenseMatrix::from_row_major(2, 2, &[2.0, 0.0, 1.0, 2.0]);
        let rhs = DenseMatrix::from_col_major(2, 1, vec![2.0, 3.0]);
        assert_eq!(tri_solve(&l, &rhs, TriMode::Forward).unwrap().as_slice(), &[1.0, 1.0]);

        let u = DenseMatrix::from_row_major(2, 2, &[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(
            tri_solve(&u, &rhs.adjoint(), TriMode::UpperInverseRight),
            Err(Error::SingularTriangular { index: 1 })
        );
    }

    #[test]
    fn tri_solve_modes_match_naive() {
        let mut rng = Pcg64::seed_from_u64(4);
        let n = 40;
        let l = DenseMatrix::from_fn(n, n, |i, j| {
            if i > j {
                f64::sample_normal(&mut rng) * 0.1
            } else if i == j {
                2.0 + (i % 3) as f64
            } else {
                0.0
            }
        });
        let b = DenseMatrix::from_fn(n, 3, |i, j| (i as f64 - j as f64).sin());
        let tol = 100.0 * n as f64 * f64::UNIT_ROUNDOFF;
        let x = tri_solve(&l, &b, TriMode::Forward).unwrap();
        assert!(rel_error(&naive_product(&l, &x), &b) <= tol);
        let x = tri_solve(&l, &b, TriMode::BackwardAdjoint).unwrap();
        assert!(rel_error(&naive_product(&l.adjoint(), &x), &b) <= tol);
        let bt = b.adjoint();
        let u = l.adjoint();
        let x = tri_solve(&u, &bt, TriMode::UpperInverseRight).unwrap();
        assert!(rel_error(&naive_product(&x, &u), &bt) <= tol);
    }
}
