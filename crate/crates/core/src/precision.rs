//! Working/lower precision pair (binary64 / binary32) and conversions.

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, WorkingScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrecisionTag {
    Working,
    Lower,
}

impl PrecisionTag {
    /// `u_h = 2^-53` for working precision, `u_l = 2^-24` for lower.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            PrecisionTag::Working => f64::UNIT_ROUNDOFF,
            PrecisionTag::Lower => f32::UNIT_ROUNDOFF as f64,
        }
    }
}

pub fn to_lower_slice<W: WorkingScalar>(src: &[W]) -> Result<Vec<W::Lower>> {
    src.iter()
        .enumerate()
        .map(|(index, &v)| {
            if !v.all_finite() {
                return Err(Error::NonFinite { index });
            }
            v.to_lower().ok_or(Error::Overflow {
                index,
                value: v.modulus(),
            })
        })
        .collect()
}

pub fn to_working_slice<W: WorkingScalar>(src: &[W::Lower]) -> Vec<W> {
    src.iter().map(|&v| W::from_lower(v)).collect()
}

/// Rounds every entry to the nearest lower-precision value.
pub fn to_lower<W: WorkingScalar>(m: &DenseMatrix<W>) -> Result<DenseMatrix<W::Lower>> {
    let data = to_lower_slice(m.as_slice())?;
    Ok(DenseMatrix::from_col_major(m.nrows(), m.ncols(), data))
}

/// Exact embedding of lower-precision data into working precision.
pub fn to_working<W: WorkingScalar>(m: &DenseMatrix<W::Lower>) -> DenseMatrix<W> {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), to_working_slice::<W>(m.as_slice()))
}
