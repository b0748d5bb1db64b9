//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Math methods (`sqrt`, `ln`, `sin_cos`, ...) come from nalgebra's
/// `ComplexField`/`RealField`, so the trait deliberately does not also pull in
/// `num_traits::Float` (the two would make every method call ambiguous).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + std::iter::Sum {
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
