//! Scalar abstraction for the hardware-float code paths.
//!
//! Everything that does not need extended working precision is generic
//! over [`Real`]; the multiprecision lane (series summation for open
//! matrix entries, high-order quadrature) lives in the `mp` submodules
//! and uses MPFR floats directly, since those carry their precision in
//! the value rather than in the type.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Hardware floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for mixing with stored parameters.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize conversion")
    }

    fn sqrt_pi() -> Self {
        Self::PI().sqrt()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default concrete scalar used by the library surface.
pub type Scalar = f64;
