//! Scalar abstraction for the statistics and closed-form queueing code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable by the summary statistics and analytical oracles.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|a - b| / |b|`; returns `|a - b|` when the reference is zero.
pub fn relative_error<T: Real>(value: T, reference: T) -> T {
    let diff = (value - reference).abs();
    if reference == T::zero() {
        diff
    } else {
        diff / reference.abs()
    }
}
