//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the kernels are written against: `f32` or `f64`.
///
/// Physical constants are stored as `f64` and converted with [`Real::lit`];
/// the numerically heavy paths (cubic, drift matrix, spectral integrands)
/// work in units scaled by the mechanical frequency so that intermediate
/// values stay inside the `f32` exponent range as well.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Convert an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite inputs and the two implementors.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Real for f32 {}
impl Real for f64 {}
