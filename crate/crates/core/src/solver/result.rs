use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::precision::PrecisionTag;

/// State after one iteration, before the convergence test acts on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub stage: PrecisionTag,
    pub iteration: usize,
    /// Ritz values of the whole block, ascending.
    pub ritz: Vec<f64>,
    /// Residual norms `‖Ax_j − θ_j x_j‖₂`.
    pub resid: Vec<f64>,
    /// Converged prefix length.
    pub n_c: usize,
    /// `‖X^*X − I‖_F`.
    pub orth_error: f64,
    /// Sum of the block's Ritz values.
    pub trace: f64,
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub factor: f64,
    pub precond_apply: f64,
    pub orthogonalize: f64,
    pub projected_eig: f64,
    pub lower_stage: f64,
    pub working_stage: f64,
    pub total: f64,
}

impl Timings {
    pub(crate) fn absorb(&mut self, other: &Timings) {
        self.precond_apply += other.precond_apply;
        self.orthogonalize += other.orthogonalize;
        self.projected_eig += other.projected_eig;
    }
}

/// Noteworthy non-fatal events during a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolverEvent {
    /// Mixed QR broke down and Householder QR in working precision was used.
    QrFallback { stage: PrecisionTag, iteration: usize },
    /// Preconditioned residual columns were dropped as numerically dependent.
    ColumnsDropped {
        stage: PrecisionTag,
        iteration: usize,
        kept: usize,
        requested: usize,
    },
    /// Fewer than `m` complement directions were available for the P block.
    ThinUpdate {
        stage: PrecisionTag,
        iteration: usize,
        columns: usize,
    },
    /// The projection basis had drifted from orthonormality and the Gram
    /// matrix was used in the Ritz step.
    GramCorrection {
        stage: PrecisionTag,
        iteration: usize,
        defect: f64,
    },
    /// The lower-precision factorization needed a diagonal shift.
    PreconditionerShift { shift: f64 },
    /// The lower-precision stage stopped without reaching its tolerance.
    LowerStageIncomplete { iterations: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct EigResult<T> {
    /// Ritz values, ascending, length `k`.
    pub theta: Vec<f64>,
    /// Ritz vectors, `n × k`.
    pub x: DenseMatrix<T>,
    /// Residual norms, recomputed in working precision at exit.
    pub residual_norms: Vec<f64>,
    pub iterations_lower: usize,
    pub iterations_working: usize,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub timings: Timings,
    /// The `‖A‖₂` estimate used by every convergence test.
    pub norm_estimate: f64,
    pub events: Vec<SolverEvent>,
}

impl<T> EigResult<T> {
    pub fn iterations(&self) -> usize {
        self.iterations_lower + self.iterations_working
    }
}
