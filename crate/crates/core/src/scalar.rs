use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point type the numeric kernels are written against (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an integer index (prime, table entry) to the scalar type.
    #[inline]
    fn from_index(n: u64) -> Self {
        Self::from_u64(n).expect("integer representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
