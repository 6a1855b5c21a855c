//! Scalar abstraction for the numeric core.
//!
//! Everything statistical in this crate is generic over [`Real`], so the same
//! code runs on `f32` and `f64`. The crate root exports `f64` aliases, which
//! are what the CLI and the file formats use.

use std::fmt::{Debug, Display};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance when checking that normalized weights sum to one.
    fn unit_sum_tolerance() -> Self;
}

impl Real for f64 {
    fn unit_sum_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn unit_sum_tolerance() -> Self {
        1e-4
    }
}

/// Convert an `f64` constant into the working scalar type.
///
/// Panics only if the value is not representable, which never happens for the
/// finite constants this crate feeds it.
pub(crate) fn real<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("finite f64 constant representable in scalar type")
}

pub(crate) fn real_from_count<R: Real>(n: u64) -> R {
    real(n as f64)
}
