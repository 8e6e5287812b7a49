//! PINVIT and LOBPCG drivers, the convergence test and the variant dispatcher.

mod config;
mod lobpcg;
mod pinvit;
mod result;

use std::time::Instant;

use rand::SeedableRng;
use rand_pcg::Pcg64;

pub use config::{SolverConfig, Variant};
pub use lobpcg::{hl_coefficients, hl_update, lobpcg_stage, StageOptions, StageOutput};
pub use pinvit::pinvit;
pub use result::{EigResult, IterationRecord, SolverEvent, Timings};

use crate::dense::{norm2, spectral_norm_estimate, DenseMatrix};
use crate::error::Result;
use crate::operator::{Matrix, Operator};
use crate::ortho::QrKind;
use crate::precision::{to_lower, to_working, PrecisionTag};
use crate::precond::{LowerView, Ordering, Preconditioner};
use crate::scalar::{RealScalar, Scalar, WorkingScalar};
use crate::sparse::rcm_ordering;

/// `R = AX − XΘ` for diagonal `Θ`.
pub(crate) fn residual_block<T: Scalar>(x: &DenseMatrix<T>, ax: &DenseMatrix<T>, theta: &[T::Real]) -> DenseMatrix<T> {
    ax.sub(&x.scale_columns(theta))
}

/// Length of the longest prefix of columns with
/// `‖r_j‖₂ ≤ tol·(‖A‖ + |θ_j|)·‖x_j‖₂`.
pub fn converged_count<T: Scalar>(
    norm_estimate: f64,
    x: &DenseMatrix<T>,
    theta: &[f64],
    r: &DenseMatrix<T>,
    tol: f64,
) -> usize {
    (0..theta.len().min(x.ncols()).min(r.ncols()))
        .take_while(|&j| {
            let rn = norm2(r.col(j)).to_f64();
            let xn = norm2(x.col(j)).to_f64();
            rn <= tol * (norm_estimate + theta[j].abs()) * xn
        })
        .count()
}

/// Two-stage LOBPCG: a lower-precision run to `cfg.lower_tol`, then a
/// working-precision run to `cfg.tol` restarted from its Ritz vectors with an
/// empty P block. Both stages share the lower-precision preconditioner.
pub fn mixed_lobpcg<W: WorkingScalar>(
    a: &Matrix<W>,
    x0: &DenseMatrix<W>,
    cfg: &SolverConfig,
    p: &Preconditioner<W>,
    norm_estimate: f64,
) -> Result<EigResult<W>> {
    let mut timings = Timings::default();
    let mut events = Vec::new();
    let clock = Instant::now();
    let a_lower = a.to_lower()?;
    let lower_opts = StageOptions {
        k: cfg.k,
        maxit: cfg.maxit,
        tol: cfg.lower_tol,
        norm_estimate,
        qr: QrKind::Householder,
    };
    let (start, iterations_lower, mut history) = match lobpcg_stage(&a_lower, &to_lower(x0)?, &LowerView(p), &lower_opts) {
        Ok(out) => {
            if !out.converged {
                events.push(SolverEvent::LowerStageIncomplete {
                    iterations: out.iterations,
                    reason: "iteration cap".into(),
                });
            }
            timings.absorb(&out.timings);
            events.extend(out.events);
            // a stage that took no step would only hand back a rounded X0
            let start = if out.iterations == 0 { x0.clone() } else { to_working::<W>(&out.x) };
            (start, out.iterations, out.history)
        }
        Err(e) => {
            events.push(SolverEvent::LowerStageIncomplete {
                iterations: 0,
                reason: e.to_string(),
            });
            (x0.clone(), 0, Vec::new())
        }
    };
    timings.lower_stage = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let opts = StageOptions {
        k: cfg.k,
        maxit: cfg.maxit,
        tol: cfg.tol,
        norm_estimate,
        qr: QrKind::Mixed,
    };
    let out = lobpcg_stage(a, &start, p, &opts)?;
    timings.working_stage = clock.elapsed().as_secs_f64();
    timings.absorb(&out.timings);
    events.extend(out.events);
    history.extend(out.history);
    Ok(EigResult {
        theta: out.theta,
        x: out.x,
        residual_norms: out.resid,
        iterations_lower,
        iterations_working: out.iterations,
        history,
        converged: out.converged,
        timings,
        norm_estimate,
        events,
    })
}

fn single_stage<W: WorkingScalar>(out: StageOutput<W>, norm_estimate: f64, stage_time: f64) -> EigResult<W> {
    let mut timings = out.timings;
    timings.working_stage = stage_time;
    EigResult {
        theta: out.theta,
        x: out.x,
        residual_norms: out.resid,
        iterations_lower: 0,
        iterations_working: out.iterations,
        history: out.history,
        converged: out.converged,
        timings,
        norm_estimate,
        events: out.events,
    }
}

/// Seeded standard Gaussian `n × m` block.
pub fn initial_block<T: Scalar>(n: usize, m: usize, seed: u64) -> DenseMatrix<T> {
    let mut rng = Pcg64::seed_from_u64(seed);
    DenseMatrix::from_fn(n, m, |_, _| T::sample_normal(&mut rng))
}

/// Seed offset separating the norm sketch from the initial block.
const SKETCH_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// The `k` smallest eigenpairs of the Hermitian positive definite `a`.
///
/// Sparse matrices are reordered by reverse Cuthill–McKee once and the whole
/// problem is solved in that ordering; eigenvectors are returned in the
/// original ordering with residuals recomputed against the original matrix.
pub fn solve<W: WorkingScalar>(a: &Matrix<W>, cfg: &SolverConfig) -> Result<EigResult<W>> {
    let total = Instant::now();
    let n = a.n();
    cfg.validate(n)?;
    let perm: Option<Vec<usize>> = match a {
        Matrix::Sparse(s) => Some(rcm_ordering(s)),
        Matrix::Dense(_) => None,
    };
    let permuted;
    let work: &Matrix<W> = match &perm {
        Some(p) => {
            permuted = a.permute(p)?;
            &permuted
        }
        None => a,
    };
    let norm_estimate = spectral_norm_estimate(work, cfg.sketch_rows, cfg.seed ^ SKETCH_SEED_OFFSET);
    let x0 = initial_block::<W>(n, cfg.m, cfg.seed);

    let precision = match cfg.variant {
        Variant::DlobpcgDchol => PrecisionTag::Working,
        _ => PrecisionTag::Lower,
    };
    let clock = Instant::now();
    let p = Preconditioner::build_with(work, precision, Ordering::Natural)?;
    let t_factor = clock.elapsed().as_secs_f64();

    let mut result = match cfg.variant {
        Variant::DlobpcgDchol | Variant::DlobpcgSchol => {
            let opts = StageOptions {
                k: cfg.k,
                maxit: cfg.maxit,
                tol: cfg.tol,
                norm_estimate,
                qr: QrKind::Householder,
            };
            let clock = Instant::now();
            let out = lobpcg_stage(work, &x0, &p, &opts)?;
            single_stage(out, norm_estimate, clock.elapsed().as_secs_f64())
        }
        Variant::Pinvit => {
            let opts = StageOptions {
                k: cfg.k,
                maxit: cfg.maxit,
                tol: cfg.tol,
                norm_estimate,
                qr: QrKind::Mixed,
            };
            let clock = Instant::now();
            let out = pinvit(work, &x0, &p, &opts)?;
            single_stage(out, norm_estimate, clock.elapsed().as_secs_f64())
        }
        Variant::MplobpcgSchol => mixed_lobpcg(work, &x0, cfg, &p, norm_estimate)?,
    };
    if p.shift_applied() > 0.0 {
        result.events.insert(0, SolverEvent::PreconditionerShift { shift: p.shift_applied() });
    }

    let k = cfg.k;
    let mut x = result.x.columns(0..k);
    if let Some(perm) = &perm {
        let xp = x;
        x = DenseMatrix::from_fn(n, k, |_, _| W::zero());
        for (new, &old) in perm.iter().enumerate() {
            for j in 0..k {
                x[(old, j)] = xp[(new, j)];
            }
        }
    }
    let theta = result.theta[..k].to_vec();
    let r = residual_block(&x, &a.apply(&x), &theta);
    result.residual_norms = (0..k).map(|j| norm2(r.col(j))).collect();
    result.converged = result.converged && converged_count(norm_estimate, &x, &theta, &r, cfg.tol) >= k;
    result.x = x;
    result.theta = theta;
    result.timings.factor = t_factor;
    result.timings.total = total.elapsed().as_secs_f64();
    Ok(result)
}
