//! Representations of `q` and `g`: exact power-law mixtures and sampled grids.

pub mod io;
mod power_law;
mod sampled;

pub use power_law::{
    closed_form_inverse, closed_form_transform, transform_constant, transform_constant_beta_sum,
    PowerLawMix, PowerTerm, TransformConstant,
};
pub use sampled::{Interpolation, SampledFunction};
