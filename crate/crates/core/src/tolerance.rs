//! Tolerance bundle shared by every check.
//!
//! Closed-form identities are compared with a relative tolerance; anything
//! computed from sampled data carries a discretization budget proportional to
//! the sampling step `h` measured against the radius under test.

use serde::{Deserialize, Serialize};

/// Default relative tolerance for closed-form comparisons.
pub const DEFAULT_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for closed forms.
    pub rel: f64,
    /// Fixed dimensionless discretization budget. `None` derives it from the
    /// sampling step as `2h/r`.
    pub geo: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: DEFAULT_REL,
            geo: None,
        }
    }
}

impl Tolerances {
    pub fn with_geo(mut self, geo: f64) -> Self {
        self.geo = Some(geo);
        self
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }

    /// Dimensionless discretization budget for sampling step `h` at radius `r`.
    pub fn eps_geo(&self, h: f64, r: f64) -> f64 {
        self.geo.unwrap_or(2.0 * h / r)
    }

    /// The same budget expressed as a length.
    pub fn eps_len(&self, h: f64, r: f64) -> f64 {
        self.eps_geo(h, r) * r
    }

    /// Strictness margin for "strictly inside a tangent ball": sampled
    /// osculating configurations sit exactly on the sphere.
    pub fn eps_tan(&self, h: f64, r: f64) -> f64 {
        h * h / r
    }
}
