use std::fmt::{Debug, Display, LowerExp};

use faer::traits::RealField;
use num_complex::Complex;
use num_traits::Float;

/// Real scalar type the whole library is generic over.
///
/// Tolerances throughout the crate are calibrated for `f64` and rescaled by
/// [`Real::tol`] for lower-precision types.
pub trait Real:
    RealField + Float + Copy + Send + Sync + Debug + Display + LowerExp + Default + 'static
{
    fn from_f64(x: f64) -> Self;

    fn to_f64(self) -> f64;

    /// An `f64`-calibrated tolerance rescaled to the machine epsilon of `Self`.
    fn tol(x: f64) -> Self {
        let ratio = (<Self as Float>::epsilon().to_f64() / f64::EPSILON).max(1.0);
        Self::from_f64(x * ratio)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

