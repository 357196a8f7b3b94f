//! Floating-point scalar abstraction.
//!
//! Everything in this crate is generic over [`Real`]; `f64` is the lane the
//! CLI and the test suites use, `f32` is available for memory-constrained
//! callers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal convertible to scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}
