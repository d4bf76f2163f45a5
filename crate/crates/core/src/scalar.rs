use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Real scalar type the engine is generic over (`f32` or `f64`).
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// A tolerance of `base`, floored at a small multiple of machine epsilon so
    /// that tolerances tuned for `f64` remain usable in lower precision.
    fn tol(base: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(16.0);
        Self::lit(base).max(floor)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }

    fn four() -> Self {
        Self::lit(4.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
