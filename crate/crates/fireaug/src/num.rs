//! Scalar abstraction for the floating-point pipelines.
//!
//! The dehazing and scoring math is written against [`Real`] so it runs at
//! f32 or f64; the crate root exposes f64 aliases as the defaults.

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Real: Float + FromPrimitive + ToPrimitive + std::fmt::Debug + Default + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lifting an f64 constant into the working scalar type.
#[inline]
pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant representable in scalar type")
}
