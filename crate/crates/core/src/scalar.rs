//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate (`f32`, `f64`).
///
/// Everything is expressed through `num-traits`; matrix-facing code adds a
/// `nalgebra::RealField` bound on top where a factorization is required.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless conversion from `usize` for index-derived quantities.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<Self>
        + Debug
        + Display
        + LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}
