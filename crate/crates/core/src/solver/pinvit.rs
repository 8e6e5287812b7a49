use std::time::Instant;

use super::lobpcg::{orthonormalize, record, ritz_rotate, StageOptions, StageOutput};
use super::result::Timings;
use super::{converged_count, residual_block};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::ortho::QrScalar;
use crate::precond::PrecondOp;
use crate::scalar::RealScalar;

/// Block preconditioned inverse iteration: orthonormalize, rotate into the
/// Ritz basis, form `R = AX − XΘ`, test, then `X̃ = X − T R`.
pub fn pinvit<T, A, P>(a: &A, x0: &DenseMatrix<T>, p: &P, opts: &StageOptions) -> Result<StageOutput<T>>
where
    T: QrScalar,
    A: Operator<T> + ?Sized,
    P: PrecondOp<T> + ?Sized,
{
    let n = a.dim();
    if x0.nrows() != n {
        return Err(Error::DimensionMismatch(format!("initial block has {} rows, operator {n}", x0.nrows())));
    }
    let mut timings = Timings::default();
    let mut events = Vec::new();
    let mut history = Vec::new();
    let mut x_tilde = x0.clone();
    let mut iterations = 0;
    loop {
        let clock = Instant::now();
        let x = orthonormalize(&x_tilde, opts.qr, iterations, &mut events).map_err(|e| match e {
            Error::RankDeficient { .. } => Error::RankCollapse,
            other => other,
        })?;
        timings.orthogonalize += clock.elapsed().as_secs_f64();
        let ax = a.apply(&x);
        let clock = Instant::now();
        let (x, ax, theta) = ritz_rotate(&x, &ax)?;
        timings.projected_eig += clock.elapsed().as_secs_f64();
        let r = residual_block(&x, &ax, &theta);
        let resid: Vec<f64> = r.column_norms().iter().map(|v| v.to_f64()).collect();
        let theta64: Vec<f64> = theta.iter().map(|t| t.to_f64()).collect();
        let n_c = converged_count(opts.norm_estimate, &x, &theta64, &r, opts.tol);
        history.push(record(iterations, &x, &theta, &resid, n_c));
        let converged = n_c >= opts.k;
        if converged || iterations >= opts.maxit {
            return Ok(StageOutput {
                x,
                theta: theta64,
                resid,
                iterations,
                converged,
                history,
                events,
                timings,
            });
        }
        iterations += 1;
        let clock = Instant::now();
        let w = p.apply_block(&r)?;
        timings.precond_apply += clock.elapsed().as_secs_f64();
        x_tilde = x.sub(&w);
    }
}
