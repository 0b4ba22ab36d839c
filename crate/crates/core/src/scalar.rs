//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the literal is not representable at all,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `k!` in the scalar type.
pub fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, j| acc * T::from_usize_lossy(j))
}

/// Falling factorial `k (k-1) ... (k-j+1)`, i.e. `k!/(k-j)!`.
pub fn falling_factorial<T: Scalar>(k: usize, j: usize) -> T {
    assert!(j <= k, "falling factorial needs j <= k");
    ((k - j + 1)..=k).fold(T::one(), |acc, m| acc * T::from_usize_lossy(m))
}

/// Binomial coefficient as a scalar.
pub fn binomial<T: Scalar>(k: usize, j: usize) -> T {
    falling_factorial::<T>(k, j) / factorial::<T>(j)
}
