//! Integral functionals `Σ = ∫₀^{R_y} X_s^p ds` of a squared Bessel process `X`
//! of index `ν` run until it first reaches `y`.
//!
//! The law code is generic over [`scalar::Real`] (`f32`, `f64`,
//! [`dd::DoubleDouble`]); exact moments use `BigRational`. Contour inversion,
//! Monte Carlo, asymptotics and pricing work in `f64`. The aliases below fix the
//! scalar to `f64` for everyday use.

// reference constants keep every digit they were computed with, and `!(a > b)`
// is the NaN-rejecting comparison
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bessel;
mod cbessel;
pub mod dd;
pub mod error;
pub mod inversion;
pub mod laws;
pub mod ode;
pub mod pricing;
pub mod quad;
pub mod scalar;
pub mod simulate;
pub mod special;

pub use dd::DoubleDouble;
pub use error::{BesqError, Result};
pub use scalar::Real;

pub type Params = laws::BesqParams<f64>;
pub type Query = laws::SigmaQuery<f64>;
pub type Barrier = laws::BarrierQuery<f64>;
pub type HalfOrder = laws::HalfOrder<f64>;
pub type Bessel = bessel::BesselEval<f64>;

pub type ParamsDD = laws::BesqParams<DoubleDouble>;
pub type QueryDD = laws::SigmaQuery<DoubleDouble>;
