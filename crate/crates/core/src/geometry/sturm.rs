//! Sampled unit-speed curves and the comparison test: a curve that starts on
//! the sphere of radius `r`, tangent to it, and turns no faster than `1/r`
//! cannot enter that sphere before arclength `pi r`.

use serde::Serialize;

use super::Radius;
use crate::boundary::Vec3;
use crate::error::{RegulusError, Result};
use crate::tolerance::Tolerances;

/// Curve sampled at strictly increasing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    times: Vec<f64>,
    points: Vec<Vec3>,
}

impl SampledCurve {
    pub fn new(times: Vec<f64>, points: Vec<Vec3>) -> Result<Self> {
        if times.len() != points.len() {
            return Err(RegulusError::InvalidInput(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if times.len() < 3 {
            return Err(RegulusError::InvalidInput(
                "a sampled curve needs at least 3 samples".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(RegulusError::InvalidInput(
                "curve parameters must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, points })
    }

    /// Samples `f` at `t = 0, step, 2 step, ...` up to and including `end`.
    pub fn from_fn(end: f64, step: f64, f: impl Fn(f64) -> Vec3) -> Result<Self> {
        if !(step > 0.0 && end > 0.0) {
            return Err(RegulusError::InvalidInput("step and end must be positive".into()));
        }
        let n = (end / step).ceil() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| (k as f64 * step).min(end)).collect();
        times.dedup();
        let points = times.iter().map(|&t| f(t)).collect();
        Self::new(times, points)
    }

    /// Planar unit-speed curve made of circular arcs (and segments, for zero
    /// curvature), starting at `(r, 0)` with tangent `(0, 1)` and sampled
    /// exactly every `step` of arclength.
    pub fn from_arcs(r: Radius, pieces: &[ArcPiece], step: f64) -> Result<Self> {
        let start = Vec3::new(r.get(), 0.0, 0.0);
        let mut states = Vec::with_capacity(pieces.len());
        let (mut p, mut heading, mut t0) = (start, std::f64::consts::FRAC_PI_2, 0.0);
        for piece in pieces {
            if !(piece.length > 0.0) || !piece.curvature.is_finite() {
                return Err(RegulusError::InvalidInput(
                    "arc pieces need positive length and finite curvature".into(),
                ));
            }
            states.push((t0, p, heading, *piece));
            p = advance(p, heading, piece.curvature, piece.length);
            heading += piece.curvature * piece.length;
            t0 += piece.length;
        }
        let total = t0;
        Self::from_fn(total, step, |t| {
            let k = states.partition_point(|s| s.0 <= t).saturating_sub(1);
            let (ts, ps, hs, piece) = states[k];
            advance(ps, hs, piece.curvature, t - ts)
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest parameter step.
    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Discrete velocities `(p_{k+1} - p_k) / (t_{k+1} - t_k)`.
    pub fn velocities(&self) -> Vec<Vec3> {
        (1..self.len())
            .map(|k| (self.points[k] - self.points[k - 1]) / (self.times[k] - self.times[k - 1]))
            .collect()
    }

    /// Discrete Lipschitz constant of the velocity: the largest change of
    /// consecutive velocities per unit parameter.
    pub fn turn_rate(&self) -> f64 {
        let v = self.velocities();
        let mut worst: f64 = 0.0;
        for k in 1..v.len() {
            let dt = 0.5 * (self.times[k + 1] - self.times[k - 1]);
            worst = worst.max((v[k] - v[k - 1]).norm() / dt);
        }
        worst
    }
}

/// Arc of signed curvature (positive turns left) and given length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPiece {
    pub length: f64,
    pub curvature: f64,
}

fn advance(p: Vec3, heading: f64, kappa: f64, s: f64) -> Vec3 {
    let (sin0, cos0) = heading.sin_cos();
    if kappa.abs() * s < 1e-8 {
        // Series expansion avoids dividing by a vanishing curvature.
        let h = heading + 0.5 * kappa * s;
        return p + Vec3::new(h.cos(), h.sin(), 0.0) * s;
    }
    let h1 = heading + kappa * s;
    p + Vec3::new(h1.sin() - sin0, cos0 - h1.cos(), 0.0) / kappa
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Precondition {
    pub ok: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SturmReport {
    /// `|gamma(0)| = r`, relative defect.
    pub a: Precondition,
    /// `<gamma(0), gamma'(0)> = 0`, defect divided by `r`.
    pub b: Precondition,
    /// Unit speed, largest `|speed - 1|`.
    pub c: Precondition,
    /// Velocity Lipschitz constant at most `1/r`, defect `rate * r - 1`.
    pub d: Precondition,
    pub first_failing: Option<char>,
    pub preconditions_ok: bool,
    pub tolerance: f64,
    /// Smallest `|gamma(t)|` over samples with `t <= pi r`; only evaluated
    /// when every precondition holds.
    pub min_norm_on_interval: Option<f64>,
    pub verdict: bool,
}

/// Checks the preconditions on sampled data and, when they hold, whether the
/// curve stays outside the open ball of radius `r` up to `t = pi r`.
///
/// Each precondition is compared against the discretization budget
/// `tol.eps_geo(h, r)` with `h` the largest parameter step.
pub fn sturm_liouville_verify(curve: &SampledCurve, r: Radius, tol: &Tolerances) -> Result<SturmReport> {
    let r = r.get();
    let times = curve.times();
    let span = times[times.len() - 1] - times[0];
    let horizon = std::f64::consts::PI * r;
    if span < horizon * (1.0 - 1e-12) {
        return Err(RegulusError::InvalidInput(format!(
            "curve covers parameter length {span}, needs at least pi r = {horizon}"
        )));
    }
    let h = curve.max_step();
    let eps = tol.eps_geo(h, r);
    let pts = curve.points();
    let vel = curve.velocities();

    let a = (pts[0].norm() - r).abs() / r;
    let b = pts[0].dot(&vel[0]).abs() / r;
    let c = vel.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    let d = (curve.turn_rate() * r - 1.0).max(0.0);

    let flag = |defect: f64| Precondition {
        ok: defect <= eps,
        defect,
    };
    let flags = [('a', flag(a)), ('b', flag(b)), ('c', flag(c)), ('d', flag(d))];
    let first_failing = flags.iter().find(|(_, f)| !f.ok).map(|(n, _)| *n);

    let (min_norm, verdict) = if first_failing.is_none() {
        let t_end = times[0] + horizon * (1.0 + 1e-12);
        let m = times
            .iter()
            .zip(pts)
            .filter(|(t, _)| **t <= t_end)
            .map(|(_, p)| p.norm())
            .fold(f64::INFINITY, f64::min);
        (Some(m), m >= r - eps * r)
    } else {
        (None, false)
    };

    Ok(SturmReport {
        a: flags[0].1,
        b: flags[1].1,
        c: flags[2].1,
        d: flags[3].1,
        first_failing,
        preconditions_ok: first_failing.is_none(),
        tolerance: eps,
        min_norm_on_interval: min_norm,
        verdict,
    })
}
