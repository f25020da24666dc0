//! Numeric traits shared by the geometry, metric and attention code.

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssignOps};
use std::fmt::Debug;

/// Exact-or-float field used by the box algebra (volumes, IoU).
///
/// Implemented for `f32`, `f64` and rational types such as
/// `num_rational::Ratio<i64>`, so box arithmetic can be checked exactly.
pub trait Field: Num + NumAssignOps + PartialOrd + Copy + Debug {}

impl<T: Num + NumAssignOps + PartialOrd + Copy + Debug> Field for T {}

/// floating point: f32 or f64
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssignOps + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64` literals.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn max_of<T: Field>(a: T, b: T) -> T {
    if a >= b {
        a
    } else {
        b
    }
}

pub(crate) fn min_of<T: Field>(a: T, b: T) -> T {
    if a <= b {
        a
    } else {
        b
    }
}
