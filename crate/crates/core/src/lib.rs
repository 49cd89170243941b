//! Mean estimators with sharp sub-Gaussian constants.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`). Sampling and
//! experiment plumbing work in `f64`; the aliases below name the `f64`
//! instantiations used throughout the harness.

// `!(x > 0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod lightness;
pub mod psi;
pub mod rng;
pub mod robust;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type PsiF64 = psi::PsiFunction<f64>;
pub type PsiF32 = psi::PsiFunction<f32>;
pub type BallF64 = geometry::Ball<f64>;
pub type NetF64 = geometry::DirectionNet<f64>;
pub type SubspaceNetF64 = geometry::SubspaceNet<f64>;
pub type DiscreteF64 = distributions::DiscreteDistribution<f64>;
pub type Estimate1DF64 = estimators::Estimate1D<f64>;
pub type Estimate2DF64 = estimators::Estimate2D<f64>;
pub type EstimateHdF64 = estimators::EstimateHd<f64>;
pub type Config2DF64 = estimators::Estimator2DConfig<f64>;
pub type ConfigHdF64 = estimators::HdConfig<f64>;
