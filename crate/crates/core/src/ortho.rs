//! Orthogonalization kernels: Householder QR, Cholesky-QR, the two-level
//! mixed-precision QR and block projection against an orthonormal basis.

use num_traits::{Float, One, Zero};

use crate::dense::{dense_cholesky, norm2, tri_solve, DenseMatrix, TriMode};
use crate::error::{Error, Result};
use crate::precision::{to_lower, to_working};
use crate::scalar::{RealScalar, Scalar, WorkingScalar};

/// `A = QR` with orthonormal `Q` and upper-triangular `R` whose diagonal is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors<T> {
    pub q: DenseMatrix<T>,
    pub r: DenseMatrix<T>,
}

/// Rescale so that `R` has a real positive diagonal.
fn fix_signs<T: Scalar>(q: &mut DenseMatrix<T>, r: &mut DenseMatrix<T>) {
    let m = r.nrows();
    for j in 0..m {
        let d = r[(j, j)];
        let mag = d.modulus();
        if mag == T::Real::zero() {
            continue;
        }
        let phase = d.scale(mag.recip());
        if phase == T::one() {
            continue;
        }
        for v in q.col_mut(j) {
            *v *= phase;
        }
        let pc = phase.conj();
        for c in j..r.ncols() {
            r[(j, c)] *= pc;
        }
        r[(j, j)] = T::from_real(mag);
    }
}

/// Householder QR with explicitly formed thin `Q`.
pub fn householder_qr<T: Scalar>(a: &DenseMatrix<T>) -> Result<QrFactors<T>> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(Error::DimensionMismatch(format!("QR of a {rows}x{cols} matrix needs rows >= cols")));
    }
    let mut work = a.clone();
    let mut reflectors: Vec<(Vec<T>, T::Real)> = Vec::with_capacity(cols);
    for j in 0..cols {
        let x = &work.col(j)[j..];
        let alpha = norm2(x);
        if !(alpha >= T::Real::min_positive_value()) || !alpha.is_finite() {
            return Err(Error::RankDeficient { column: j });
        }
        let x0 = x[0];
        let m0 = x0.modulus();
        let phase = if m0 == T::Real::zero() {
            T::one()
        } else {
            x0.scale(m0.recip())
        };
        let mut v = x.to_vec();
        v[0] = x0 + phase.scale(alpha);
        // 2 / ‖v‖² with ‖v‖² = 2α(α + |x0|)
        let beta = T::Real::one() / (alpha * (alpha + m0));
        for c in j + 1..cols {
            reflect(&v, beta, &mut work.col_mut(c)[j..]);
        }
        let cj = work.col_mut(j);
        cj[j] = -phase.scale(alpha);
        for e in cj[j + 1..].iter_mut() {
            *e = T::zero();
        }
        reflectors.push((v, beta));
    }
    let mut q = DenseMatrix::eye(rows, cols);
    for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
        for c in j..cols {
            reflect(v, *beta, &mut q.col_mut(c)[j..]);
        }
    }
    let mut r = DenseMatrix::from_fn(cols, cols, |i, c| if i <= c { work[(i, c)] } else { T::zero() });
    fix_signs(&mut q, &mut r);
    Ok(QrFactors { q, r })
}

/// `y ← (I − β v v^*) y`.
#[inline]
fn reflect<T: Scalar>(v: &[T], beta: T::Real, y: &mut [T]) {
    let s: T = v.iter().zip(y.iter()).map(|(a, b)| a.conj() * *b).sum();
    if s == T::zero() {
        return;
    }
    let s = s.scale(beta);
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= *vi * s;
    }
}

/// Single-pass Cholesky-QR: `V^*V = LL^*`, `Q = V L^{-*}`, `R = L^*`.
///
/// Orthogonality degrades like `κ(V)²·u`. A pivot at or below `cols·u` of
/// its Gram diagonal is reported as `NotPositiveDefinite`.
pub fn cholesky_qr<T: Scalar>(v: &DenseMatrix<T>) -> Result<QrFactors<T>> {
    let (rows, cols) = v.shape();
    if rows < cols {
        return Err(Error::DimensionMismatch(format!("QR of a {rows}x{cols} matrix needs rows >= cols")));
    }
    let gram = v.adjoint_mul(v).hermitian_part();
    let l = dense_cholesky(&gram)?;
    let floor = T::Real::from_usize(cols.max(1)) * T::Real::UNIT_ROUNDOFF;
    for j in 0..cols {
        let pivot = l[(j, j)].re();
        let diag = gram[(j, j)].re();
        if pivot * pivot <= floor * diag {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: (pivot * pivot).to_f64(),
            });
        }
    }
    let r = l.adjoint();
    let q = tri_solve(&r, v, TriMode::UpperInverseRight)?;
    Ok(QrFactors { q, r })
}

/// Mixed-precision QR: Householder QR of `lower(A)`, then Cholesky-QR of
/// the working-precision `V = A·working(R_lower)^{-1}`, giving
/// working-precision orthogonality for `κ(A)` up to roughly `1/u_lower`.
pub fn mixed_qr<W: WorkingScalar>(a: &DenseMatrix<W>) -> Result<QrFactors<W>> {
    let lower = to_lower(a)?;
    let first = householder_qr(&lower)?;
    let r_lower = to_working::<W>(&first.r);
    let v = tri_solve(&r_lower, a, TriMode::UpperInverseRight)?;
    let second = cholesky_qr(&v)?;
    let r = second.r.mul(&r_lower);
    Ok(QrFactors { q: second.q, r })
}

/// `passes` rounds of `W ← W − B(B^*W)`.
pub fn block_project_out<T: Scalar>(w: &DenseMatrix<T>, b: &DenseMatrix<T>, passes: usize) -> DenseMatrix<T> {
    if b.ncols() == 0 || w.ncols() == 0 {
        return w.clone();
    }
    let mut out = w.clone();
    for _ in 0..passes {
        let coeff = b.adjoint_mul(&out);
        out = out.sub(&b.mul(&coeff));
    }
    out
}

/// Which QR the solver uses for its block orthogonalizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum QrKind {
    Householder,
    Mixed,
}

/// QR factors together with whether the mixed path fell back to Householder.
#[derive(Debug, Clone)]
pub struct QrOutcome<T> {
    pub factors: QrFactors<T>,
    pub fell_back: bool,
}

/// Per-precision QR dispatch. Lower-precision scalars always use Householder.
pub trait QrScalar: Scalar {
    fn qr(a: &DenseMatrix<Self>, kind: QrKind) -> Result<QrOutcome<Self>>;
}

macro_rules! qr_native {
    ($t:ty) => {
        impl QrScalar for $t {
            fn qr(a: &DenseMatrix<Self>, _kind: QrKind) -> Result<QrOutcome<Self>> {
                Ok(QrOutcome {
                    factors: householder_qr(a)?,
                    fell_back: false,
                })
            }
        }
    };
}

macro_rules! qr_working {
    ($t:ty) => {
        impl QrScalar for $t {
            fn qr(a: &DenseMatrix<Self>, kind: QrKind) -> Result<QrOutcome<Self>> {
                match kind {
                    QrKind::Householder => Ok(QrOutcome {
                        factors: householder_qr(a)?,
                        fell_back: false,
                    }),
                    QrKind::Mixed => match mixed_qr(a) {
                        Ok(factors) => Ok(QrOutcome {
                            factors,
                            fell_back: false,
                        }),
                        Err(Error::NotPositiveDefinite { .. }) | Err(Error::Overflow { .. }) => Ok(QrOutcome {
                            factors: householder_qr(a)?,
                            fell_back: true,
                        }),
                        Err(e) => Err(e),
                    },
                }
            }
        }
    };
}

qr_native!(f32);
qr_native!(num_complex::Complex32);
qr_working!(f64);
qr_working!(num_complex::Complex64);
