use rand::SeedableRng;
use rand_pcg::Pcg64;

use super::matrix::DenseMatrix;
use crate::operator::Operator;
use crate::scalar::{RealScalar, Scalar};

/// Default number of Gaussian sketch rows.
pub const DEFAULT_SKETCH_ROWS: usize = 8;

/// Randomized estimate `‖A‖₂ ≈ ‖ΩA‖_F / ‖Ω‖_F` with a seeded Gaussian
/// `Ω ∈ F^{sketch_rows × n}`. For Hermitian `A`, `ΩA = (A Ω^*)^*`.
pub fn spectral_norm_estimate<T: Scalar, A: Operator<T> + ?Sized>(
    a: &A,
    sketch_rows: usize,
    seed: u64,
) -> f64 {
    let n = a.dim();
    let rows = sketch_rows.max(1);
    let mut rng = Pcg64::seed_from_u64(seed);
    let omega_adj = DenseMatrix::<T>::from_fn(n, rows, |_, _| T::sample_normal(&mut rng));
    let num = a.apply(&omega_adj).frobenius_norm().to_f64();
    let den = omega_adj.frobenius_norm().to_f64();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exact_on_scaled_identity() {
        let id = DenseMatrix::<f64>::identity(40);
        assert_eq!(spectral_norm_estimate(&id, 8, 3), 1.0);
        let seven = DenseMatrix::<f64>::from_diagonal(&[7.0; 40]);
        assert_eq!(spectral_norm_estimate(&seven, 8, 4), 7.0);
        let c = DenseMatrix::<Complex64>::from_diagonal(&[2.0; 10]);
        assert_eq!(spectral_norm_estimate(&c, 3, 5), 2.0);
    }

    #[test]
    fn diagonal_expectation() {
        let vals: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        let a = DenseMatrix::<f64>::from_diagonal(&vals);
        // E‖ΩA‖²_F / E‖Ω‖²_F = mean(λ²)
        let rms = (vals.iter().map(|v| v * v).sum::<f64>() / 100.0).sqrt();
        let mut acc = 0.0;
        for seed in 0..32 {
            let est = spectral_norm_estimate(&a, 8, seed);
            assert!((1.0..=100.0).contains(&est));
            acc += est;
        }
        let mean = acc / 32.0;
        assert!((mean - rms).abs() <= 0.25 * rms, "mean {mean} vs rms {rms}");
    }
}
