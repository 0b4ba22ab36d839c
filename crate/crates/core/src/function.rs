//! The function-handle abstraction consumed by the quadrature and transform routines.

use crate::error::Result;
use crate::funcspace::{PowerLawMix, SampledFunction};
use crate::scalar::Scalar;

/// A real function of one real variable.
///
/// Plain closures `Fn(T) -> T` implement this directly; fallible closures are wrapped in
/// [`Fallible`]. Representations with an exact or tabulated structure expose it through
/// the `as_*` hooks so that callers can pick a specialised path.
pub trait RealFunction<T: Scalar> {
    fn eval(&self, x: T) -> Result<T>;

    fn as_power_law(&self) -> Option<&PowerLawMix<T>> {
        None
    }

    fn as_sampled(&self) -> Option<&SampledFunction<T>> {
        None
    }
}

impl<T: Scalar, F: Fn(T) -> T> RealFunction<T> for F {
    #[inline]
    fn eval(&self, x: T) -> Result<T> {
        Ok(self(x))
    }
}

/// Adapter for closures that can fail.
#[derive(Clone, Copy)]
pub struct Fallible<F>(pub F);

impl<T: Scalar, F: Fn(T) -> Result<T>> RealFunction<T> for Fallible<F> {
    #[inline]
    fn eval(&self, x: T) -> Result<T> {
        (self.0)(x)
    }
}
