//! Field and precision abstractions shared by every kernel.
//!
//! Kernels are generic over [`Scalar`], which covers `f32`, `f64` and their
//! complex counterparts. [`WorkingScalar`] pairs a working-precision scalar
//! with its lower-precision partner.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::{Complex, Complex32, Complex64};
use num_traits::{Float, One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ortho::QrScalar;
use crate::precision::PrecisionTag;

pub trait Scalar:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Zero
    + One
{
    type Real: RealScalar;

    const IS_COMPLEX: bool;
    /// Precision level this scalar type stands for.
    const PRECISION: PrecisionTag;

    fn from_real(re: Self::Real) -> Self;
    /// Builds `re + i*im`; the imaginary part is dropped for real fields.
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
    fn conj(self) -> Self;
    fn abs_sqr(self) -> Self::Real;

    fn modulus(self) -> Self::Real {
        self.abs_sqr().sqrt()
    }

    fn scale(self, s: Self::Real) -> Self {
        self * Self::from_real(s)
    }

    fn all_finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }

    /// Standard normal sample; complex samples have unit expected modulus squared.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

pub trait RealScalar: Scalar<Real = Self> + Float + PartialOrd {
    const UNIT_ROUNDOFF: Self;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

/// A working-precision scalar together with its lower-precision partner.
pub trait WorkingScalar: Scalar<Real = f64> + QrScalar {
    type Lower: Scalar<Real = f32> + QrScalar;

    /// Round to nearest-even; `None` when a component overflows to infinity.
    fn to_lower(self) -> Option<Self::Lower>;
    fn from_lower(v: Self::Lower) -> Self;
}

macro_rules! impl_real {
    ($t:ty, $u:expr, $prec:expr) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;
            const PRECISION: PrecisionTag = $prec;

            #[inline]
            fn from_real(re: Self) -> Self {
                re
            }
            #[inline]
            fn from_parts(re: Self, _im: Self) -> Self {
                re
            }
            #[inline]
            fn re(self) -> Self {
                self
            }
            #[inline]
            fn im(self) -> Self {
                0.0
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn abs_sqr(self) -> Self {
                self * self
            }
            #[inline]
            fn modulus(self) -> Self {
                <$t>::abs(self)
            }
            fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }
        }

        impl RealScalar for $t {
            const UNIT_ROUNDOFF: Self = $u;

            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f64, f64::EPSILON / 2.0, PrecisionTag::Working);
impl_real!(f32, f32::EPSILON / 2.0, PrecisionTag::Lower);

macro_rules! impl_complex {
    ($r:ty, $prec:expr) => {
        impl Scalar for Complex<$r> {
            type Real = $r;
            const IS_COMPLEX: bool = true;
            const PRECISION: PrecisionTag = $prec;

            #[inline]
            fn from_real(re: $r) -> Self {
                Complex::new(re, 0.0)
            }
            #[inline]
            fn from_parts(re: $r, im: $r) -> Self {
                Complex::new(re, im)
            }
            #[inline]
            fn re(self) -> $r {
                self.re
            }
            #[inline]
            fn im(self) -> $r {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::new(self.re, -self.im)
            }
            #[inline]
            fn abs_sqr(self) -> $r {
                self.re * self.re + self.im * self.im
            }
            #[inline]
            fn modulus(self) -> $r {
                self.re.hypot(self.im)
            }
            #[inline]
            fn scale(self, s: $r) -> Self {
                Complex::new(self.re * s, self.im * s)
            }
            fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                let re: $r = rng.sample(StandardNormal);
                let im: $r = rng.sample(StandardNormal);
                Complex::new(re, im).scale(std::f64::consts::FRAC_1_SQRT_2 as $r)
            }
        }
    };
}

impl_complex!(f64, PrecisionTag::Working);
impl_complex!(f32, PrecisionTag::Lower);

impl WorkingScalar for f64 {
    type Lower = f32;

    #[inline]
    fn to_lower(self) -> Option<f32> {
        let v = self as f32;
        if v.is_infinite() && self.is_finite() {
            None
        } else {
            Some(v)
        }
    }

    #[inline]
    fn from_lower(v: f32) -> Self {
        v as f64
    }
}

impl WorkingScalar for Complex64 {
    type Lower = Complex32;

    #[inline]
    fn to_lower(self) -> Option<Complex32> {
        Some(Complex32::new(self.re.to_lower()?, self.im.to_lower()?))
    }

    #[inline]
    fn from_lower(v: Complex32) -> Self {
        Complex64::new(v.re as f64, v.im as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundoffs() {
        assert_eq!(f64::UNIT_ROUNDOFF, 2f64.powi(-53));
        assert_eq!(f32::UNIT_ROUNDOFF, 2f32.powi(-24));
    }

    #[test]
    fn complex_conj_and_modulus() {
        let z = Complex64::new(3.0, -4.0);
        assert_eq!(z.conj(), Complex64::new(3.0, 4.0));
        assert_eq!(z.modulus(), 5.0);
        assert_eq!(z.abs_sqr(), 25.0);
    }

    #[test]
    fn lower_overflow_detected() {
        assert!(1e39f64.to_lower().is_none());
        assert!(Complex64::new(1.0, -1e39).to_lower().is_none());
        assert_eq!(f64::INFINITY.to_lower(), Some(f32::INFINITY));
    }
}
