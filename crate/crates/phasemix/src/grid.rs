//! Geometric evaluation grids.

use crate::error::{Error, Result};
use serde::Serialize;

/// Log-spaced grid specification: `points_per_decade` points per factor of
/// ten from `x_lo` to `x_hi`, endpoints included.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub points_per_decade: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_lo > 0.0 && self.x_hi > self.x_lo) {
            return Err(Error::InvalidModel(format!(
                "grid requires 0 < lo < hi, got {}:{}",
                self.x_lo, self.x_hi
            )));
        }
        if self.points_per_decade < 1 {
            return Err(Error::InvalidModel(
                "grid needs at least one point per decade".into(),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let decades = (self.x_hi / self.x_lo).log10();
        let n = (decades * self.points_per_decade as f64).ceil() as usize;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = self.x_lo * 10f64.powf(i as f64 / self.points_per_decade as f64);
            out.push(x.min(self.x_hi));
        }
        if let Some(last) = out.last_mut() {
            *last = self.x_hi;
        }
        out.dedup();
        out
    }

    /// Parse the CLI form `LO:HI:PPD`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidModel(format!(
                "grid spec must be LO:HI:PPD, got {spec:?}"
            )));
        }
        let x_lo: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidModel(format!("bad grid lower bound {:?}", parts[0])))?;
        let x_hi: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidModel(format!("bad grid upper bound {:?}", parts[1])))?;
        let ppd: usize = parts[2]
            .parse()
            .map_err(|_| Error::InvalidModel(format!("bad points-per-decade {:?}", parts[2])))?;
        let g = Self {
            x_lo,
            x_hi,
            points_per_decade: ppd,
        };
        g.validate()?;
        Ok(g)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_lo: 0.1,
            x_hi: 1e3,
            points_per_decade: 8,
        }
    }
}
