//! Phase-type scale mixture distributions.
//!
//! A phase-type scale mixture is the law of X = S * Y where Y follows a
//! finite phase-type distribution G and S is an independent positive scaling
//! factor with distribution H, equivalently the Mellin-Stieltjes convolution
//! F(x) = int G(x/s) dH(s). This crate evaluates such mixtures numerically
//! (tail, density, moments, sampling), and classifies their tail behavior:
//! heavy versus light, Frechet versus Gumbel domain of attraction, and
//! subexponentiality, with closed-form asymptotes cross-checked against
//! direct numerics.
//!
//! Modules follow the pipeline: [`phase`] and [`spectral`] handle the
//! phase-type component, [`scaler`] the scaling families, [`mixture`] the
//! convolution itself, and [`asymptotics`] the classification layer.
//! [`special`] supplies Bessel K, Lambert W, Gamma, and zeta; [`quad`] the
//! double-exponential quadrature everything rides on.

// Guards spelled `!(x > 0.0)` are deliberate: they treat NaN as invalid
// input, which `x <= 0.0` would silently let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod grid;
pub mod matexp;
pub mod mixture;
pub mod model;
pub mod phase;
pub mod quad;
pub mod scaler;
pub mod special;
pub mod spectral;

pub use asymptotics::{analyze, MdaReport};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use mixture::{MixtureModel, MixturePolicy, SeriesBounds};
pub use phase::PhaseType;
pub use scaler::{Scaler, ScalerFamily};
pub use spectral::{ph_spectral, SpectralForm};
