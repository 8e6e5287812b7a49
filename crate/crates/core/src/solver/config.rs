use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::DEFAULT_SKETCH_ROWS;
use crate::error::{Error, Result};

/// Solver variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Working-precision LOBPCG, working-precision Cholesky preconditioner.
    DlobpcgDchol,
    /// Working-precision LOBPCG, lower-precision Cholesky preconditioner.
    DlobpcgSchol,
    /// Lower-precision LOBPCG stage followed by a working-precision stage,
    /// lower-precision Cholesky preconditioner and mixed QR.
    MplobpcgSchol,
    /// Block PINVIT with lower-precision Cholesky preconditioner and mixed QR.
    Pinvit,
}

impl Variant {
    /// The three LOBPCG variants, in reporting order.
    pub const LOBPCG: [Variant; 3] = [Variant::DlobpcgDchol, Variant::DlobpcgSchol, Variant::MplobpcgSchol];

    pub fn name(self) -> &'static str {
        match self {
            Variant::DlobpcgDchol => "dlobpcg-dchol",
            Variant::DlobpcgSchol => "dlobpcg-schol",
            Variant::MplobpcgSchol => "mplobpcg-schol",
            Variant::Pinvit => "pinvit",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dlobpcg-dchol" => Ok(Variant::DlobpcgDchol),
            "dlobpcg-schol" => Ok(Variant::DlobpcgSchol),
            "mplobpcg-schol" => Ok(Variant::MplobpcgSchol),
            "pinvit" => Ok(Variant::Pinvit),
            other => Err(Error::InvalidConfig(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of wanted eigenpairs.
    pub k: usize,
    /// Block size.
    pub m: usize,
    /// Iteration cap, per stage.
    pub maxit: usize,
    pub tol: f64,
    /// Stopping tolerance of the lower-precision stage.
    pub lower_tol: f64,
    pub seed: u64,
    pub variant: Variant,
    pub sketch_rows: usize,
}

impl SolverConfig {
    pub const DEFAULT_MAXIT: usize = 2000;
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_LOWER_TOL: f64 = 5e-6;

    pub fn new(k: usize, variant: Variant) -> Self {
        Self {
            k,
            m: Self::default_block(k),
            maxit: Self::DEFAULT_MAXIT,
            tol: Self::DEFAULT_TOL,
            lower_tol: Self::DEFAULT_LOWER_TOL,
            seed: 0,
            variant,
            sketch_rows: DEFAULT_SKETCH_ROWS,
        }
    }

    /// `ceil(1.5 k)`.
    pub fn default_block(k: usize) -> usize {
        (3 * k).div_ceil(2)
    }

    pub fn with_block(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_maxit(mut self, maxit: usize) -> Self {
        self.maxit = maxit;
        self
    }

    /// Checks `1 ≤ k ≤ m`, `3m ≤ n` and `0 < tol < lower_tol < 1`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if self.k > self.m {
            return Err(Error::InvalidConfig(format!("k = {} exceeds block size m = {}", self.k, self.m)));
        }
        if 3 * self.m > n {
            return Err(Error::InvalidConfig(format!(
                "block size m = {} needs 3m <= n, but n = {n}",
                self.m
            )));
        }
        if !(self.tol > 0.0 && self.tol < self.lower_tol && self.lower_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must satisfy 0 < tol < lower_tol < 1 (got {:e}, {:e})",
                self.tol, self.lower_tol
            )));
        }
        if self.maxit == 0 {
            return Err(Error::InvalidConfig("maxit must be positive".into()));
        }
        if self.sketch_rows == 0 {
            return Err(Error::InvalidConfig("sketch_rows must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolverConfig::new(10, Variant::MplobpcgSchol);
        assert_eq!(c.m, 15);
        assert_eq!(SolverConfig::default_block(3), 5);
        assert_eq!(SolverConfig::default_block(1), 2);
        assert_eq!(c.maxit, 2000);
        assert_eq!(c.tol, 1e-12);
        assert_eq!(c.lower_tol, 5e-6);
        assert_eq!(c.sketch_rows, 8);
        assert!(c.validate(45).is_ok());
        assert!(c.validate(44).is_err());
    }

    #[test]
    fn invalid_configs() {
        let c = SolverConfig::new(4, Variant::Pinvit).with_block(3);
        assert!(matches!(c.validate(100), Err(Error::InvalidConfig(_))));
        let c = SolverConfig::new(2, Variant::Pinvit).with_tol(1e-3);
        assert!(c.validate(100).is_err());
        let c = SolverConfig::new(0, Variant::Pinvit);
        assert!(c.validate(100).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [Variant::DlobpcgDchol, Variant::DlobpcgSchol, Variant::MplobpcgSchol, Variant::Pinvit] {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("lobpcg".parse::<Variant>().is_err());
    }
}
