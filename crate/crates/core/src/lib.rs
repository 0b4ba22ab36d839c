//! The kernels `A_n(x) = ∫_x^1 (1-y)^n dy / y`, the integral conversion
//! `g(t) = ∫_0^t A_n(y/t) q(y) dy` together with its inverse, and a numerical
//! verification engine for the conjectured bound on `∫_0^∞ q(t) ln(1 + t^{-2α}) dt`.
//!
//! Everything numeric is generic over the [`Scalar`] type (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations used by the command-line tool.

pub mod conjecture;
pub mod error;
pub mod funcspace;
pub mod function;
pub mod grid;
pub mod inverse;
pub mod kernel;
pub mod numerics;
pub mod scalar;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
pub use function::{Fallible, RealFunction};
pub use kernel::{KernelEvalConfig, KernelOrder};
pub use numerics::{DiffConfig, QuadratureConfig, TransformResult};
pub use scalar::Scalar;

pub use conjecture::{CheckConfig, ConjectureParams, ConjectureReport, Verdict};
pub use funcspace::{Interpolation, PowerLawMix, PowerTerm, SampledFunction};
pub use grid::GridSpec;
pub use inverse::{InverseConfig, InverseEstimate, InverseMode};

pub type PowerLawMix64 = PowerLawMix<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type QuadratureConfig64 = QuadratureConfig<f64>;
pub type DiffConfig64 = DiffConfig<f64>;
pub type InverseConfig64 = InverseConfig<f64>;
pub type TransformResult64 = TransformResult<f64>;
pub type ConjectureParams64 = ConjectureParams<f64>;
pub type ConjectureReport64 = ConjectureReport<f64>;
pub type CheckConfig64 = CheckConfig<f64>;

pub type PowerLawMix32 = PowerLawMix<f32>;
pub type SampledFunction32 = SampledFunction<f32>;
pub type QuadratureConfig32 = QuadratureConfig<f32>;
