//! Closed-form sagitta/half-chord functions and the chord-doubling recursion.
//!
//! For a chord of length `s` on a sphere of radius `r`:
//! * `phi(s)` is the sagitta, `r - sqrt(r^2 - s^2/4)`;
//! * `psi(s)` is the length of each half-chord obtained by inserting the arc
//!   midpoint, `sqrt((s/2)^2 + phi(s)^2)`;
//! * `2^n psi^n(s)` is the length of the inscribed polygon with `2^n` equal
//!   sides, which converges to the arc length `2r atan(s / sqrt(4r^2 - s^2))`.

pub mod six_ball;
pub mod sturm;

use serde::{Deserialize, Serialize};

use crate::error::{RegulusError, Result};

pub use six_ball::{six_ball_check, SixBallConfig, SixBallReport};
pub use sturm::{sturm_liouville_verify, ArcPiece, SampledCurve, SturmReport};

/// A strictly positive, finite radius.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Radius(f64);

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r.is_finite() {
            Ok(Radius(r))
        } else {
            Err(RegulusError::domain("Radius::new", r, "(0, inf)"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Radius {
    type Error = RegulusError;

    fn try_from(r: f64) -> Result<Self> {
        Radius::new(r)
    }
}

impl From<Radius> for f64 {
    fn from(r: Radius) -> f64 {
        r.0
    }
}

fn check_chord(func: &'static str, s: f64, r: Radius) -> Result<()> {
    if (0.0..=2.0 * r.0).contains(&s) {
        Ok(())
    } else {
        Err(RegulusError::domain(func, s, format!("[0, {}]", 2.0 * r.0)))
    }
}

/// Sagitta of a chord of length `s` on a sphere of radius `r`.
pub fn phi(s: f64, r: Radius) -> Result<f64> {
    check_chord("phi", s, r)?;
    Ok(phi_unchecked(s, r.0))
}

pub(crate) fn phi_unchecked(s: f64, r: f64) -> f64 {
    // r - sqrt(r^2 - q) rewritten without cancellation for small s.
    let q = s * s / 4.0;
    let root = (r * r - q).max(0.0).sqrt();
    q / (r + root)
}

/// Half-chord length after inserting the arc midpoint.
pub fn psi(s: f64, r: Radius) -> Result<f64> {
    check_chord("psi", s, r)?;
    Ok(psi_unchecked(s, r.0))
}

pub(crate) fn psi_unchecked(s: f64, r: f64) -> f64 {
    let p = phi_unchecked(s, r);
    (s * s / 4.0 + p * p).sqrt()
}

/// Arc length subtended by a chord of length `s`; `pi r` at `s = 2r`.
pub fn chord_doubling_limit(s: f64, r: Radius) -> Result<f64> {
    check_chord("chord_doubling_limit", s, r)?;
    let r = r.0;
    Ok(2.0 * r * s.atan2((4.0 * r * r - s * s).max(0.0).sqrt()))
}

/// `2^n` times the `n`-fold composition of `psi` applied to `s`.
pub fn iterate_psi(s: f64, r: Radius, n: u32) -> Result<f64> {
    check_chord("iterate_psi", s, r)?;
    let mut x = s;
    for _ in 0..n {
        x = psi_unchecked(x, r.0);
    }
    Ok(x * 2f64.powi(n as i32))
}

/// Lipschitz factor `1/sqrt(1 - 2s)` of the projection on the tube of
/// relative width `s`.
pub fn c_s(s: f64) -> Result<f64> {
    if (0.0..0.5).contains(&s) {
        Ok(1.0 / (1.0 - 2.0 * s).sqrt())
    } else {
        Err(RegulusError::domain("c_s", s, "[0, 1/2)"))
    }
}
