use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the fields and solvers are generic over (`f32` or `f64`).
///
/// Dense linear algebra (least squares, SVD) is always carried out in `f64`;
/// values cross that boundary through [`Real::of`] and [`Real::to_f64`].
pub trait Real:
    Float + FloatConst + NumAssign + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite scalar")
    }

    /// Machine epsilon relative tolerance used by default comparisons.
    fn default_tolerance() -> Self;
}

impl Real for f32 {
    fn default_tolerance() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn default_tolerance() -> Self {
        1e-12
    }
}
