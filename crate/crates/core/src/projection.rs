//! Tubular neighbourhoods, the nearest-point projection and the height
//! function `f(x) = <x - pi(x), eta(pi(x))>`, plus the local tangent-ball
//! test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::Vec3;
use crate::error::{RegulusError, Result};
use crate::geometry::c_s;
use crate::index::IndexedBoundary;
use crate::intrinsic::golden_min;
use crate::serde_util;
use crate::tolerance::Tolerances;

/// `d(x, boundary) < delta`, with the distance taken to the nearest sample.
pub fn tube_membership(x: &Vec3, ix: &IndexedBoundary, delta: f64) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(RegulusError::domain("tube_membership", delta, "(0, inf)"));
    }
    let (_, d) = ix.grid().nearest(x).ok_or(RegulusError::EmptyBoundary)?;
    Ok(d < delta)
}

/// Nearest boundary point of a query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionResult {
    /// Nearest sample (lowest index among ties).
    pub foot: usize,
    /// Distance to the nearest sample.
    pub distance: f64,
    /// Foot refined along the interpolated edges around `foot`.
    #[serde(serialize_with = "serde_util::point")]
    pub foot_point: Vec3,
    /// Scaled normal at `foot_point`.
    #[serde(serialize_with = "serde_util::point")]
    pub foot_eta: Vec3,
    /// Distance to `foot_point`.
    pub refined_distance: f64,
    pub ambiguous: bool,
    /// Distance excess of the best competing local minimum, if any.
    #[serde(serialize_with = "serde_util::finite_opt")]
    pub second_best_gap: Option<f64>,
}

/// Projects `x` onto the sampled boundary.
///
/// A competing foot is a sample farther than `2h` from the nearest one that
/// is a local minimum of the distance to `x` along the adjacency and lies
/// within `2h` of the best distance. Its presence marks the projection
/// ambiguous: `x` is then (up to sampling) on the medial axis.
pub fn project(x: &Vec3, ix: &IndexedBoundary) -> Result<ProjectionResult> {
    let (foot, distance) = ix.grid().nearest(x).ok_or(RegulusError::EmptyBoundary)?;
    let h = ix.resolution_h();
    let amb_tol = 2.0 * h;
    let fp = ix.point(foot);

    let mut cand = Vec::new();
    ix.grid().within(x, distance + amb_tol * (1.0 + 1e-12), &mut cand);
    let dist = |j: usize| (ix.point(j) - x).norm();
    let mut gap: Option<f64> = None;
    for &j in &cand {
        if j == foot || (ix.point(j) - fp).norm() <= amb_tol {
            continue;
        }
        let dj = dist(j);
        if ix.neighbors(j).iter().all(|&k| dist(k) >= dj) {
            let g = dj - distance;
            gap = Some(gap.map_or(g, |old: f64| old.min(g)));
        }
    }

    let (foot_point, foot_eta) = refine_foot(ix, x, foot);
    Ok(ProjectionResult {
        foot,
        distance,
        foot_point,
        foot_eta,
        refined_distance: (x - foot_point).norm(),
        ambiguous: gap.is_some_and(|g| g <= amb_tol),
        second_best_gap: gap,
    })
}

/// Closest point to `x` on the Hermite arcs of the edges at sample `k`.
fn refine_foot(ix: &IndexedBoundary, x: &Vec3, k: usize) -> (Vec3, Vec3) {
    let mut best = (ix.point(k), ix.eta(k));
    let mut best_d = (best.0 - x).norm();
    for &nb in ix.neighbors(k) {
        let u = golden_min(|u| (ix.edge_point(k, nb, u) - x).norm(), 0.0, 1.0, 48);
        if u == 0.0 {
            continue;
        }
        let (p, eta) = ix.edge_frame(k, nb, u);
        let d = (p - x).norm();
        if d < best_d {
            best_d = d;
            best = (p, eta);
        }
    }
    best
}

/// Height `<x - pi(x), eta(pi(x))>`: positive outside, negative inside.
/// Equals `t r^2` at `x = p + t eta(p)`.
pub fn height(x: &Vec3, ix: &IndexedBoundary) -> Result<f64> {
    let p = project(x, ix)?;
    if let Some(gap) = p.second_best_gap.filter(|_| p.ambiguous) {
        return Err(RegulusError::AmbiguousProjection {
            x: x.x,
            y: x.y,
            z: x.z,
            gap,
        });
    }
    let limit = 0.5 * ix.r();
    if !(p.refined_distance < limit) {
        return Err(RegulusError::TubeExit {
            distance: p.refined_distance,
            limit,
        });
    }
    Ok((x - p.foot_point).dot(&p.foot_eta))
}

/// Largest normalized residual `|(f(x + h v) - f(x - h v)) / 2h - <v, eta(pi x)>| / |v|`
/// over the probe directions.
pub fn differential_check(ix: &IndexedBoundary, x: &Vec3, directions: &[Vec3], h_fd: f64) -> Result<f64> {
    if directions.len() < ix.dim() {
        return Err(RegulusError::InvalidInput(format!(
            "need at least {} probe directions, got {}",
            ix.dim(),
            directions.len()
        )));
    }
    if !(h_fd > 0.0) {
        return Err(RegulusError::domain("differential_check", h_fd, "(0, inf)"));
    }
    let base = project(x, ix)?;
    let eta = base.foot_eta;
    let mut worst: f64 = 0.0;
    for v in directions {
        let nv = v.norm();
        if !(nv > 0.0) {
            return Err(RegulusError::InvalidInput("probe direction is zero".into()));
        }
        let fp = height(&(x + v * h_fd), ix)?;
        let fm = height(&(x - v * h_fd), ix)?;
        let res = ((fp - fm) / (2.0 * h_fd) - v.dot(&eta)).abs() / nv;
        worst = worst.max(res);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionProbe {
    pub s: f64,
    pub trials: usize,
    /// Largest `|pi(x) - pi(y)| / |x - y|` observed.
    pub max_ratio: f64,
    /// `1 / sqrt(1 - 2s)`.
    pub bound: f64,
    pub tolerance: f64,
    pub ok: bool,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec3 {
    loop {
        let mut v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
        if dim == 3 {
            v.z = rng.gen_range(-1.0..1.0);
        }
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Random pairs on normal fibers `p + t eta(p)`, `|t| < s`, of nearby samples;
/// compares the projection's stretch against `1/sqrt(1 - 2s)`.
pub fn projection_lipschitz_probe(
    ix: &IndexedBoundary,
    s: f64,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProjectionProbe> {
    if !(s > 0.0 && s < 0.5) {
        return Err(RegulusError::domain("projection_lipschitz_probe", s, "(0, 1/2)"));
    }
    let bound = c_s(s)?;
    let r = ix.r();
    let reach = (4.0 * ix.resolution_h()).max(s * r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut near = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut done = 0;
    for _ in 0..trials {
        let i = rng.gen_range(0..ix.len());
        ix.grid().within(&ix.point(i), reach, &mut near);
        let j = near[rng.gen_range(0..near.len())];
        let x = ix.point(i) + ix.eta(i) * rng.gen_range(-s..s);
        let y = ix.point(j) + ix.eta(j) * rng.gen_range(-s..s);
        let e = (x - y).norm();
        if e == 0.0 {
            continue;
        }
        let (px, py) = (project(&x, ix)?, project(&y, ix)?);
        if px.ambiguous || py.ambiguous {
            continue;
        }
        max_ratio = max_ratio.max((px.foot_point - py.foot_point).norm() / e);
        done += 1;
    }
    let tolerance = tol.eps_geo(ix.resolution_h(), r);
    Ok(ProjectionProbe {
        s,
        trials: done,
        max_ratio,
        bound,
        tolerance,
        ok: max_ratio <= bound + tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticBound {
    pub s: f64,
    pub trials: usize,
    /// Trials skipped because the probe point had an ambiguous projection.
    pub skipped: usize,
    /// `min (C_s/2) |v|^2 - |f(x + v) - <v, eta(x)>|`.
    #[serde(serialize_with = "serde_util::finite")]
    pub worst_slack: f64,
    /// The same slack divided by `|v|^2`.
    #[serde(serialize_with = "serde_util::finite")]
    pub worst_relative_slack: f64,
    pub worst_sample: Option<usize>,
    pub tolerance: f64,
    pub ok: bool,
}

/// Probes `|f(x + v) - <v, eta(x)>| <= (C_s / 2) |v|^2` at boundary samples
/// `x` with random `|v| <= v_max`, where `v_max` is at most `s r`.
pub fn quadratic_bound_check(
    ix: &IndexedBoundary,
    s: f64,
    v_max: f64,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<QuadraticBound> {
    if !(s > 0.0 && s < 0.5) {
        return Err(RegulusError::domain("quadratic_bound_check", s, "(0, 1/2)"));
    }
    let cs = c_s(s)?;
    let r = ix.r();
    if !(v_max > 0.0 && v_max <= s * r) {
        return Err(RegulusError::domain(
            "quadratic_bound_check",
            v_max,
            format!("(0, {}]", s * r),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::INFINITY, f64::INFINITY, None);
    let (mut done, mut skipped) = (0, 0);
    for _ in 0..trials {
        let i = rng.gen_range(0..ix.len());
        let v = random_unit(&mut rng, ix.dim()) * (v_max * rng.gen_range(0.0..1.0f64).max(1e-6));
        let x = ix.point(i);
        let f = match height(&(x + v), ix) {
            Ok(f) => f,
            Err(RegulusError::AmbiguousProjection { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let v2 = v.norm_squared();
        let slack = 0.5 * cs * v2 - (f - v.dot(&ix.eta(i))).abs();
        if slack / v2 < worst.1 {
            worst = (slack, slack / v2, Some(i));
        }
        done += 1;
    }
    let tolerance = tol.eps_geo(ix.resolution_h(), r);
    Ok(QuadraticBound {
        s,
        trials: done,
        skipped,
        worst_slack: worst.0,
        worst_relative_slack: worst.1,
        worst_sample: worst.2,
        tolerance,
        ok: worst.1 >= -tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentBallVerdict {
    pub point: usize,
    pub radius: f64,
    pub inner_ok: bool,
    pub outer_ok: bool,
    /// Lowest-index sample strictly inside one of the balls.
    pub violating_sample: Option<usize>,
    /// Largest radius up to `r` at which both balls are empty (bisection).
    pub effective_radius: f64,
}

/// Checks that no sample within `epsilon` of sample `idx` lies strictly
/// inside the balls of the given radius tangent at `idx` on either side.
pub fn local_tangent_ball_test(
    ix: &IndexedBoundary,
    idx: usize,
    radius: f64,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<TangentBallVerdict> {
    ix.check_index(idx)?;
    if !(radius > 0.0) {
        return Err(RegulusError::domain("local_tangent_ball_test", radius, "(0, inf)"));
    }
    if !(epsilon > 0.0) {
        return Err(RegulusError::domain("local_tangent_ball_test", epsilon, "(0, inf)"));
    }
    let r = ix.r();
    let x = ix.point(idx);
    let n = ix.normal(idx);
    let margin = tol.eps_tan(ix.resolution_h(), r);
    let mut local = Vec::new();
    ix.grid().within(&x, epsilon, &mut local);

    let violator = |rho: f64, sign: f64| {
        let c = x + n * (sign * rho);
        let lim = rho - margin;
        local
            .iter()
            .copied()
            .find(|&j| j != idx && (ix.point(j) - c).norm() < lim)
    };
    let inner = violator(radius, -1.0);
    let outer = violator(radius, 1.0);
    let passes = |rho: f64| violator(rho, -1.0).is_none() && violator(rho, 1.0).is_none();

    let effective_radius = if passes(r) {
        r
    } else {
        let (mut lo, mut hi) = (0.0, r);
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            if passes(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(TangentBallVerdict {
        point: idx,
        radius,
        inner_ok: inner.is_none(),
        outer_ok: outer.is_none(),
        violating_sample: match (inner, outer) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
        effective_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Boundary;
    use std::f64::consts::PI;

    fn circle(n: usize) -> IndexedBoundary {
        let lp = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let u = Vec3::new(t.cos(), t.sin(), 0.0);
                (u, u)
            })
            .collect();
        IndexedBoundary::new(Boundary::from_loops(2, vec![lp]).unwrap()).unwrap()
    }

    #[test]
    fn tube() {
        let ix = circle(1000);
        assert!(tube_membership(&Vec3::new(1.1, 0.0, 0.0), &ix, 0.2).unwrap());
        assert!(!tube_membership(&Vec3::zeros(), &ix, 0.5).unwrap());
        assert!(tube_membership(&ix.point(3), &ix, 1e-9).unwrap());
        assert!(tube_membership(&Vec3::zeros(), &ix, 0.0).is_err());
    }

    #[test]
    fn projections() {
        let ix = circle(1000);
        let p = project(&Vec3::new(1.3, 0.0, 0.0), &ix).unwrap();
        assert_eq!(p.foot, 0);
        assert!((p.distance - 0.3).abs() < 1e-12);
        assert!(!p.ambiguous);
        assert!(project(&Vec3::zeros(), &ix).unwrap().ambiguous);
        let q = ix.point(17) + ix.eta(17) * 0.2;
        let p = project(&q, &ix).unwrap();
        assert_eq!(p.foot, 17);
        assert!((p.distance - 0.2).abs() < 1e-12);
        // Off-sample query: the refined foot is on the circle.
        let t = 2.0 * PI * 17.5 / 1000.0;
        let q = Vec3::new(t.cos(), t.sin(), 0.0) * 0.7;
        let p = project(&q, &ix).unwrap();
        assert!((p.refined_distance - 0.3).abs() < 1e-9, "{}", p.refined_distance);
    }

    #[test]
    fn heights() {
        let ix = circle(1000);
        let p = ix.point(5);
        let e = ix.eta(5);
        assert!((height(&(p + e * 0.2), &ix).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(height(&p, &ix).unwrap(), 0.0);
        assert!((height(&(p - e * 0.1), &ix).unwrap() + 0.1).abs() < 1e-12);
        assert!(matches!(
            height(&Vec3::zeros(), &ix),
            Err(RegulusError::AmbiguousProjection { .. })
        ));
    }

    #[test]
    fn differential() {
        let ix = circle(2000);
        let x = Vec3::new(1.2, 0.0, 0.0);
        let dirs = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.6, 0.8, 0.0),
        ];
        assert!(differential_check(&ix, &x, &dirs, 1e-4).unwrap() <= 1e-3);
        assert!(differential_check(&ix, &x, &dirs[..1], 1e-4).is_err());
    }

    #[test]
    fn probes_respect_bounds() {
        let ix = circle(2000);
        let tol = Tolerances::default();
        let p = projection_lipschitz_probe(&ix, 0.25, 500, 7, &tol).unwrap();
        assert!(p.ok && p.max_ratio <= 2f64.sqrt() + p.tolerance, "{p:?}");
        let q = quadratic_bound_check(&ix, 0.25, 0.25, 500, 7, &tol).unwrap();
        assert!(q.ok, "{q:?}");
    }

    #[test]
    fn tangent_balls() {
        let ix = circle(1000);
        let tol = Tolerances::default();
        let v = local_tangent_ball_test(&ix, 0, 1.0, 0.5, &tol).unwrap();
        assert!(v.inner_ok && v.outer_ok);
        assert_eq!(v.effective_radius, 1.0);
        let v = local_tangent_ball_test(&ix, 0, 1.2, 0.5, &tol).unwrap();
        assert!(!v.inner_ok && v.outer_ok);
        assert!(v.violating_sample.is_some());
    }
}
