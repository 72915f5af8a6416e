//! JSON model schemas and strict deserialization into validated domain types.
//!
//! Schemas:
//!   PH:      {"beta": [..], "lambda": [[..], ..]}
//!   Scaler:  {"family": "pareto", "alpha": 2.5} and analogous per family
//!   Mixture: {"ph": <PH>, "scaler": <Scaler>, "policy": {..}?}
//!
//! Unknown fields are rejected, and parse errors carry the JSON path plus
//! line/column from the underlying deserializer.

use crate::error::{Error, Result};
use crate::mixture::{MixtureModel, MixturePolicy};
use crate::phase::PhaseType;
use crate::scaler::{Scaler, ScalerFamily};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhSpec {
    pub beta: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
}

impl PhSpec {
    pub fn build(self) -> Result<PhaseType> {
        PhaseType::new(self.beta, self.lambda)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalerSpec {
    Exponential { rate: f64 },
    Pareto { alpha: f64 },
    Lognormal { sigma: f64 },
    Weibull { scale: f64, shape: f64 },
    Gamma { shape: f64, rate: f64 },
    Zipf { alpha: f64 },
    Geometric { p: f64 },
    FiniteDiscrete { points: Vec<f64>, probs: Vec<f64> },
    PointMass { value: f64 },
}

impl ScalerSpec {
    pub fn build(self) -> Result<Scaler> {
        let family = match self {
            ScalerSpec::Exponential { rate } => ScalerFamily::Exponential { rate },
            ScalerSpec::Pareto { alpha } => ScalerFamily::Pareto { alpha },
            ScalerSpec::Lognormal { sigma } => ScalerFamily::Lognormal { sigma },
            ScalerSpec::Weibull { scale, shape } => ScalerFamily::Weibull { scale, shape },
            ScalerSpec::Gamma { shape, rate } => ScalerFamily::Gamma { shape, rate },
            ScalerSpec::Zipf { alpha } => ScalerFamily::Zipf { alpha },
            ScalerSpec::Geometric { p } => ScalerFamily::Geometric { p },
            ScalerSpec::FiniteDiscrete { points, probs } => {
                ScalerFamily::FiniteDiscrete { points, probs }
            }
            ScalerSpec::PointMass { value } => ScalerFamily::PointMass { value },
        };
        Scaler::new(family)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default = "default_quad_tol")]
    pub quadrature_tolerance: f64,
    #[serde(default = "default_subdiv")]
    pub max_subdivisions: usize,
    #[serde(default = "default_series")]
    pub series_tolerance: f64,
}

fn default_quad_tol() -> f64 {
    MixturePolicy::default().quadrature_tolerance
}
fn default_subdiv() -> usize {
    MixturePolicy::default().max_subdivisions
}
fn default_series() -> f64 {
    MixturePolicy::default().series_tolerance
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self {
            quadrature_tolerance: default_quad_tol(),
            max_subdivisions: default_subdiv(),
            series_tolerance: default_series(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub ph: PhSpec,
    pub scaler: ScalerSpec,
    #[serde(default)]
    pub policy: PolicySpec,
}

impl MixtureSpec {
    pub fn build(self) -> Result<MixtureModel> {
        let ph = self.ph.build()?;
        let scaler = self.scaler.build()?;
        let policy = MixturePolicy {
            quadrature_tolerance: self.policy.quadrature_tolerance,
            max_subdivisions: self.policy.max_subdivisions,
            series_tolerance: self.policy.series_tolerance,
        };
        MixtureModel::new(ph, scaler, policy)
    }
}

/// Parse a mixture model from JSON text with path-precise error messages.
pub fn mixture_from_json(text: &str) -> Result<MixtureModel> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: MixtureSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::InvalidModel(format!("{} (at {})", e.inner(), e.path())))?;
    spec.build()
}

/// Parse a standalone PH model from JSON text.
pub fn ph_from_json(text: &str) -> Result<PhaseType> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: PhSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::InvalidModel(format!("{} (at {})", e.inner(), e.path())))?;
    spec.build()
}

/// Parse a standalone scaler from JSON text.
pub fn scaler_from_json(text: &str) -> Result<Scaler> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ScalerSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::InvalidModel(format!("{} (at {})", e.inner(), e.path())))?;
    spec.build()
}
