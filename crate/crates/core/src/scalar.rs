use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type underlying every numerical kernel in the crate.
///
/// Implemented for `f32` and `f64`. `f64` is the production type; the
/// `f32` instantiation exists to keep the kernels honest about precision
/// assumptions and is exercised in the test suite.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for converting an `f64` literal into `Self`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range for scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
