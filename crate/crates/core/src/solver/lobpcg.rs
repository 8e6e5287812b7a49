use std::time::Instant;

use num_traits::{Float, Zero};

use super::result::{IterationRecord, SolverEvent, Timings};
use super::{converged_count, residual_block};
use crate::dense::{dense_cholesky, small_herm_eig, tri_solve, DenseMatrix, TriMode};
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::ortho::{block_project_out, householder_qr, QrKind, QrScalar};
use crate::precision::PrecisionTag;
use crate::precond::PrecondOp;
use crate::scalar::{RealScalar, Scalar};

/// Parameters of one LOBPCG or PINVIT run in a single arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct StageOptions {
    pub k: usize,
    pub maxit: usize,
    pub tol: f64,
    /// `‖A‖₂` estimate for the convergence test.
    pub norm_estimate: f64,
    pub qr: QrKind,
}

/// Outcome of a single-precision iteration.
#[derive(Debug, Clone)]
pub struct StageOutput<T> {
    /// Full block of `m` Ritz vectors.
    pub x: DenseMatrix<T>,
    /// All `m` Ritz values, ascending.
    pub theta: Vec<f64>,
    pub resid: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    pub events: Vec<SolverEvent>,
    pub timings: Timings,
}

pub(crate) fn stage_tag<T: Scalar>() -> PrecisionTag {
    T::PRECISION
}

/// Orthonormalize `x` with the requested QR; records a fallback event.
pub(crate) fn orthonormalize<T: QrScalar>(
    x: &DenseMatrix<T>,
    kind: QrKind,
    iteration: usize,
    events: &mut Vec<SolverEvent>,
) -> Result<DenseMatrix<T>> {
    let out = T::qr(x, kind)?;
    if out.fell_back {
        events.push(SolverEvent::QrFallback {
            stage: stage_tag::<T>(),
            iteration,
        });
    }
    Ok(out.factors.q)
}

/// Rotate `x` (and `ax`) into the Ritz basis of `x^*Ax`.
pub(crate) fn ritz_rotate<T: Scalar>(
    x: &DenseMatrix<T>,
    ax: &DenseMatrix<T>,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>, Vec<T::Real>)> {
    let h = x.adjoint_mul(ax).hermitian_part();
    let eig = small_herm_eig(&h)?;
    Ok((x.mul(&eig.vectors), ax.mul(&eig.vectors), eig.values))
}

pub(crate) fn record<T: Scalar>(
    iteration: usize,
    x: &DenseMatrix<T>,
    theta: &[T::Real],
    resid: &[f64],
    n_c: usize,
) -> IterationRecord {
    let ritz: Vec<f64> = theta.iter().map(|t| t.to_f64()).collect();
    IterationRecord {
        stage: stage_tag::<T>(),
        iteration,
        trace: ritz.iter().sum(),
        ritz,
        resid: resid.to_vec(),
        n_c,
        orth_error: x.orthonormality_defect().to_f64(),
    }
}

/// Columns kept after projection must retain at least this fraction of their norm.
fn drop_threshold<T: Scalar>() -> T::Real {
    T::Real::from_f64(1e4) * T::Real::UNIT_ROUNDOFF
}

/// Orthonormal basis for `W` projected against the orthonormal `b`:
/// two projection passes, dependent columns dropped, QR, and one more
/// projection pass when the QR result has drifted away from `b^⊥`.
pub(crate) fn orthonormalize_against<T: QrScalar>(
    w: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    kind: QrKind,
    iteration: usize,
    events: &mut Vec<SolverEvent>,
) -> Result<DenseMatrix<T>> {
    let requested = w.ncols();
    let unit = |m: &DenseMatrix<T>| -> (DenseMatrix<T>, Vec<T::Real>) {
        let norms = m.column_norms();
        let inv: Vec<T::Real> = norms
            .iter()
            .map(|&v| if v > T::Real::zero() && v.is_finite() { v.recip() } else { T::Real::zero() })
            .collect();
        (m.scale_columns(&inv), norms)
    };
    let (w, _) = unit(w);
    let projected = block_project_out(&w, b, 2);
    let (mut cur, norms) = unit(&projected);
    let keep: Vec<usize> = (0..norms.len())
        .filter(|&j| norms[j] > drop_threshold::<T>() && norms[j].is_finite())
        .collect();
    if keep.len() < cur.ncols() {
        cur = cur.select_columns(&keep);
    }
    let rows = cur.nrows();
    let proj_tol = T::Real::from_f64(10.0) * T::Real::from_usize(rows).sqrt() * T::Real::UNIT_ROUNDOFF;
    let q = loop {
        if cur.ncols() == 0 {
            return Err(Error::RankCollapse);
        }
        let out = match T::qr(&cur, kind) {
            Ok(out) => out,
            Err(Error::RankDeficient { column }) => {
                let keep: Vec<usize> = (0..cur.ncols()).filter(|&j| j != column).collect();
                cur = cur.select_columns(&keep);
                continue;
            }
            Err(e) => return Err(e),
        };
        if out.fell_back {
            events.push(SolverEvent::QrFallback {
                stage: stage_tag::<T>(),
                iteration,
            });
        }
        let r = &out.factors.r;
        let rmax = (0..r.ncols()).map(|j| r[(j, j)].re()).fold(T::Real::zero(), Float::max);
        if let Some(j) = (0..r.ncols()).find(|&j| r[(j, j)].re() <= drop_threshold::<T>() * rmax) {
            let keep: Vec<usize> = (0..cur.ncols()).filter(|&c| c != j).collect();
            cur = cur.select_columns(&keep);
            continue;
        }
        let mut q = out.factors.q;
        if b.ncols() > 0 && b.adjoint_mul(&q).frobenius_norm() > proj_tol {
            let again = block_project_out(&q, b, 1);
            let out = T::qr(&again, kind)?;
            q = out.factors.q;
        }
        break q;
    };
    if q.ncols() < requested {
        events.push(SolverEvent::ColumnsDropped {
            stage: stage_tag::<T>(),
            iteration,
            kept: q.ncols(),
            requested,
        });
    }
    Ok(q)
}

/// Coefficients of the next `X` and `P` blocks from the eigenvectors `c` of
/// the projected problem.
///
/// `X` takes the first `m` columns. `P` spans the part of `span{X_new, X_old}`
/// orthogonal to `X_new` (in the metric of `gram`, the identity when `S` is
/// orthonormal): `P = C(:, m+1:q)·V`, where `V` is an orthonormal basis of
/// `(C(:, m+1:q)^* G)(:, 1:m)`, which reduces to `C(1:m, m+1:q)^*`.
/// Returns `(C_x, C_p, thin)`, `thin` set when `V` could not be formed with
/// `m` columns and the full complement `C(:, m+1:q)` was used instead.
pub fn hl_coefficients<T: Scalar>(
    c: &DenseMatrix<T>,
    m: usize,
    gram: Option<&DenseMatrix<T>>,
) -> (DenseMatrix<T>, DenseMatrix<T>, bool) {
    let q = c.ncols();
    let cx = c.columns(0..m);
    let comp = c.columns(m..q);
    if q - m < m {
        return (cx, comp, true);
    }
    let top = match gram {
        None => comp.rows_range(0..m).adjoint(),
        Some(g) => comp.adjoint_mul(&g.columns(0..m)),
    };
    match householder_qr(&top) {
        Ok(f) => (cx, comp.mul(&f.q), false),
        Err(_) => (cx, comp.columns(0..m), true),
    }
}

/// The basis update: `X = S·C(:, 1:m)`, `P = S·C(:, m+1:q)·V`, `θ = D(1:m)`.
pub fn hl_update<T: Scalar>(
    s: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    d: &[T::Real],
    m: usize,
) -> (DenseMatrix<T>, DenseMatrix<T>, Vec<T::Real>) {
    let (cx, cp, _) = hl_coefficients(c, m, None);
    (s.mul(&cx), s.mul(&cp), d[..m].to_vec())
}

/// Eigen-decomposition of the projected pencil `(S^*AS, S^*S)`. When `S`
/// is orthonormal to within `10·q·u` the standard problem is solved;
/// otherwise the Gram matrix is factored and returned.
#[allow(clippy::type_complexity)]
fn projected_eig<T: Scalar>(
    s: &DenseMatrix<T>,
    a_s: &DenseMatrix<T>,
) -> Result<(Vec<T::Real>, DenseMatrix<T>, Option<(DenseMatrix<T>, f64)>)> {
    let q = s.ncols();
    let h = s.adjoint_mul(a_s).hermitian_part();
    let g = s.adjoint_mul(s).hermitian_part();
    let defect = g.sub(&DenseMatrix::identity(q)).frobenius_norm();
    let limit = T::Real::from_f64(10.0) * T::Real::from_usize(q) * T::Real::UNIT_ROUNDOFF;
    if defect <= limit {
        let eig = small_herm_eig(&h)?;
        return Ok((eig.values, eig.vectors, None));
    }
    let l = dense_cholesky(&g).map_err(|_| Error::RankCollapse)?;
    let y = tri_solve(&l, &h, TriMode::Forward)?;
    let reduced = tri_solve(&l, &y.adjoint(), TriMode::Forward)?.adjoint();
    let eig = small_herm_eig(&reduced)?;
    let c = tri_solve(&l, &eig.vectors, TriMode::BackwardAdjoint)?;
    Ok((eig.values, c, Some((g, defect.to_f64()))))
}

/// LOBPCG in the arithmetic of `T`, starting from `x0` with an empty P block.
///
/// Each iteration forms `W = T(AX − XΘ)`, orthonormalizes it against `[X, P]`,
/// solves the projected problem on `S = [X, P, W]` and applies the basis
/// update. Returns after `n_c ≥ k` or `maxit` updates.
pub fn lobpcg_stage<T, A, P>(a: &A, x0: &DenseMatrix<T>, p: &P, opts: &StageOptions) -> Result<StageOutput<T>>
where
    T: QrScalar,
    A: Operator<T> + ?Sized,
    P: PrecondOp<T> + ?Sized,
{
    let n = a.dim();
    let m = x0.ncols();
    if x0.nrows() != n {
        return Err(Error::DimensionMismatch(format!("initial block has {} rows, operator {n}", x0.nrows())));
    }
    let mut timings = Timings::default();
    let mut events = Vec::new();
    let mut history = Vec::new();

    let clock = Instant::now();
    let x = orthonormalize(x0, opts.qr, 0, &mut events)?;
    timings.orthogonalize += clock.elapsed().as_secs_f64();
    let ax = a.apply(&x);
    let clock = Instant::now();
    let (mut x, mut ax, mut theta) = ritz_rotate(&x, &ax)?;
    timings.projected_eig += clock.elapsed().as_secs_f64();
    let mut pb = DenseMatrix::<T>::zeros(n, 0);
    let mut apb = DenseMatrix::<T>::zeros(n, 0);

    let mut iterations = 0;
    let mut converged = false;
    let mut resid;
    loop {
        let r = residual_block(&x, &ax, &theta);
        resid = r.column_norms().iter().map(|v| v.to_f64()).collect::<Vec<_>>();
        let theta64: Vec<f64> = theta.iter().map(|t| t.to_f64()).collect();
        let n_c = converged_count(opts.norm_estimate, &x, &theta64, &r, opts.tol);
        history.push(record(iterations, &x, &theta, &resid, n_c));
        if n_c >= opts.k {
            converged = true;
            break;
        }
        if iterations >= opts.maxit {
            break;
        }
        iterations += 1;

        let clock = Instant::now();
        let w = p.apply_block(&r)?;
        timings.precond_apply += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let basis = DenseMatrix::hcat(n, &[&x, &pb]);
        let w = orthonormalize_against(&w, &basis, opts.qr, iterations, &mut events)?;
        timings.orthogonalize += clock.elapsed().as_secs_f64();
        let aw = a.apply(&w);

        let s = DenseMatrix::hcat(n, &[&x, &pb, &w]);
        let a_s = DenseMatrix::hcat(n, &[&ax, &apb, &aw]);
        let clock = Instant::now();
        let (d, c, gram) = projected_eig(&s, &a_s)?;
        timings.projected_eig += clock.elapsed().as_secs_f64();
        if let Some((_, defect)) = &gram {
            events.push(SolverEvent::GramCorrection {
                stage: stage_tag::<T>(),
                iteration: iterations,
                defect: *defect,
            });
        }
        let (cx, cp, thin) = hl_coefficients(&c, m, gram.as_ref().map(|(g, _)| g));
        if thin {
            events.push(SolverEvent::ThinUpdate {
                stage: stage_tag::<T>(),
                iteration: iterations,
                columns: cp.ncols(),
            });
        }
        x = s.mul(&cx);
        pb = s.mul(&cp);
        apb = a_s.mul(&cp);
        ax = a.apply(&x);
        theta = d[..m].to_vec();
    }
    Ok(StageOutput {
        x,
        theta: theta.iter().map(|t| t.to_f64()).collect(),
        resid,
        iterations,
        converged,
        history,
        events,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::rel_error;
    use crate::oracle::{random_spd, with_condition};
    use crate::operator::Matrix;
    use crate::precond::{LowerView, Preconditioner};
    use crate::precision::to_lower;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    fn opts(k: usize, tol: f64, norm: f64) -> StageOptions {
        StageOptions {
            k,
            maxit: 500,
            tol,
            norm_estimate: norm,
            qr: QrKind::Mixed,
        }
    }

    fn gaussian(n: usize, m: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = Pcg64::seed_from_u64(seed);
        DenseMatrix::from_fn(n, m, |_, _| f64::sample_normal(&mut rng))
    }

    fn principal_sines(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
        // ‖(I − QaQa^*) Qb‖_F with orthonormal bases
        let qa = householder_qr(a).unwrap().q;
        let qb = householder_qr(b).unwrap().q;
        block_project_out(&qb, &qa, 2).frobenius_norm()
    }

    #[test]
    fn identity_coefficients() {
        let m = 3;
        let c = DenseMatrix::<f64>::identity(3 * m);
        let s = gaussian(20, 3 * m, 1);
        let d: Vec<f64> = (0..3 * m).map(|i| i as f64).collect();
        let (x, p, theta) = hl_update(&s, &c, &d, m);
        assert_eq!(x, s.columns(0..m));
        assert_eq!(p, s.columns(m..2 * m));
        assert_eq!(theta, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn update_keeps_previous_block_in_span() {
        let m = 4;
        let q = 3 * m;
        let s = householder_qr(&gaussian(60, q, 2)).unwrap().q;
        let c = householder_qr(&gaussian(q, q, 3)).unwrap().q;
        let d = vec![0.0; q];
        let (x, p, _) = hl_update(&s, &c, &d, m);
        // span{X_new, P} = span{X_new, S(:, 1:m)}
        let both = DenseMatrix::hcat(60, &[&x, &p]);
        let old = DenseMatrix::hcat(60, &[&x, &s.columns(0..m)]);
        assert!(principal_sines(&both, &old) < 1e-12);
        assert!(both.orthonormality_defect() < 1e-13);
        assert!(x.adjoint_mul(&p).frobenius_norm() < 1e-13);
    }

    #[test]
    fn gram_metric_matches_orthonormal_case() {
        let m = 3;
        let q = 3 * m;
        let c = householder_qr(&gaussian(q, q, 9)).unwrap().q;
        let (_, plain, _) = hl_coefficients(&c, m, None);
        let (_, with_id, _) = hl_coefficients(&c, m, Some(&DenseMatrix::identity(q)));
        assert!(rel_error(&plain, &with_id) < 1e-14);
    }

    #[test]
    fn thin_complement_when_w_lost_columns() {
        let m = 3;
        let c = householder_qr(&gaussian(5, 5, 4)).unwrap().q;
        let (cx, cp, thin) = hl_coefficients(&c, m, None);
        assert!(thin);
        assert_eq!(cx.ncols(), 3);
        assert_eq!(cp.ncols(), 2);
    }

    #[test]
    fn diagonal_with_exact_inverse() {
        let n = 200;
        let a = Matrix::Dense(DenseMatrix::from_diagonal(&(1..=n).map(|i| i as f64).collect::<Vec<_>>()));
        let p = Preconditioner::exact_inverse(&a).unwrap();
        let out = lobpcg_stage(&a, &gaussian(n, 8, 7), &p, &opts(5, 1e-12, n as f64)).unwrap();
        assert!(out.converged);
        // Chebyshev rate on A⁻¹ for the fifth pair: 1/(1.8 + √(1.8² − 1)) ≈ 0.30 per step
        assert!(out.iterations <= 21, "{} iterations", out.iterations);
        for (j, t) in out.theta[..5].iter().enumerate() {
            assert!((t - (j + 1) as f64).abs() < 1e-10);
        }
        assert!(out.x.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn first_iteration_has_no_p_block() {
        let (d, _) = random_spd(30, 10.0, 1);
        let a = Matrix::Dense(d);
        let p = Preconditioner::exact_inverse(&a).unwrap();
        let mut o = opts(2, 1e-12, 10.0);
        o.maxit = 1;
        let out = lobpcg_stage(&a, &gaussian(30, 3, 2), &p, &o).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.history.len(), 2);
    }

    #[test]
    fn trace_is_monotone_and_bounded_below() {
        let n = 120;
        let (d, lambda) = random_spd(n, 1e3, 4);
        let a = Matrix::Dense(d);
        let p = Preconditioner::build(&a, PrecisionTag::Lower).unwrap();
        let out = lobpcg_stage(&a, &gaussian(n, 6, 3), &p, &opts(4, 1e-12, 1e3)).unwrap();
        assert!(out.converged);
        let slack = 10.0 * n as f64 * f64::UNIT_ROUNDOFF * 1e3;
        for pair in out.history.windows(2) {
            assert!(pair[1].trace <= pair[0].trace + slack);
        }
        for rec in &out.history {
            assert!(rec.orth_error <= 1e-10);
            for (t, l) in rec.ritz.iter().zip(&lambda) {
                assert!(*t >= l - slack);
            }
        }
    }

    #[test]
    fn lower_precision_stage_reaches_lower_tolerance() {
        let n = 100;
        let (d, lambda) = random_spd(n, 100.0, 6);
        let a = Matrix::Dense(d);
        let p = Preconditioner::build(&a, PrecisionTag::Lower).unwrap();
        let a_l = a.to_lower().unwrap();
        let x0 = to_lower(&gaussian(n, 5, 8)).unwrap();
        let mut o = opts(3, 5e-6, 100.0);
        o.qr = QrKind::Householder;
        let out = lobpcg_stage(&a_l, &x0, &LowerView(&p), &o).unwrap();
        assert!(out.converged);
        for (t, l) in out.theta[..3].iter().zip(&lambda) {
            assert!((t - l).abs() / l < 1e-4);
        }
    }

    #[test]
    fn projection_drops_dependent_columns() {
        let n = 50;
        let b = householder_qr(&gaussian(n, 4, 1)).unwrap().q;
        let inside = b.mul(&gaussian(4, 1, 2));
        let w = DenseMatrix::hcat(n, &[&gaussian(n, 2, 3), &inside]);
        let mut events = Vec::new();
        let q = orthonormalize_against(&w, &b, QrKind::Mixed, 1, &mut events).unwrap();
        assert_eq!(q.ncols(), 2);
        assert!(matches!(events[0], SolverEvent::ColumnsDropped { kept: 2, requested: 3, .. }));
        let all = DenseMatrix::hcat(n, &[&b, &q]);
        assert!(all.orthonormality_defect() < 1e-12);
        assert!(matches!(
            orthonormalize_against(&inside, &b, QrKind::Mixed, 1, &mut events),
            Err(Error::RankCollapse)
        ));
    }

    #[test]
    fn projection_handles_ill_conditioned_w() {
        let n = 200;
        let b = householder_qr(&gaussian(n, 10, 5)).unwrap().q;
        let w: DenseMatrix<f64> = with_condition(n, 10, 1e9, 6);
        let mut events = Vec::new();
        let q = orthonormalize_against(&w, &b, QrKind::Mixed, 1, &mut events).unwrap();
        let all = DenseMatrix::hcat(n, &[&b, &q]);
        assert!(all.orthonormality_defect() < 1e-10);
    }
}
