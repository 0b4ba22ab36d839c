//! Quadrature and differentiation engines.

pub mod finite_diff;
pub mod gauss;
mod linalg;
pub mod polyfit;
pub mod quadrature;

pub use polyfit::{differentiate, DiffConfig, GridSpacing, LocalFit};
pub use quadrature::{
    integrate_adaptive, integrate_log_singular, integrate_to_infinity, QuadratureConfig,
    TransformResult,
};
