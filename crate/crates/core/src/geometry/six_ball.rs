//! Checker for the three-pairs-of-tangent-balls configuration that bounds how
//! far a boundary point on the bisector of a chord can sit from the chord
//! midpoint.
//!
//! Each pair `(B_i, B_i')` is encoded by a tangency point `x_i` and a scaled
//! normal `eta_i`: `B_i` is centred at `x_i + eta_i`, `B_i'` at `x_i - eta_i`.
//! Only `eta3` is mandatory. Missing `eta1`/`eta2` are completed by searching
//! for the normals that make the two ball unions as close to disjoint as
//! possible, so a failing hypothesis (b) means no completion exists.

use serde::Serialize;

use super::{phi_unchecked, Radius};
use crate::boundary::Vec3;
use crate::error::{RegulusError, Result};
use crate::tolerance::DEFAULT_REL;

#[derive(Debug, Clone, PartialEq)]
pub struct SixBallConfig {
    pub x1: Vec3,
    pub x2: Vec3,
    pub x3: Vec3,
    pub eta3: Vec3,
    pub r: Radius,
    pub eta1: Option<Vec3>,
    pub eta2: Option<Vec3>,
}

impl SixBallConfig {
    pub fn new(x1: Vec3, x2: Vec3, x3: Vec3, eta3: Vec3, r: Radius) -> Result<Self> {
        let cfg = Self {
            x1,
            x2,
            x3,
            eta3,
            r,
            eta1: None,
            eta2: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_normals(mut self, eta1: Vec3, eta2: Vec3) -> Result<Self> {
        self.eta1 = Some(eta1);
        self.eta2 = Some(eta2);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let r = self.r.get();
        if (self.eta3.norm() - r).abs() > DEFAULT_REL * r {
            return Err(RegulusError::InvalidInput(format!(
                "|eta3| = {} differs from r = {r}",
                self.eta3.norm()
            )));
        }
        if self.x1 == self.x2 {
            return Err(RegulusError::InvalidInput("x1 and x2 coincide".into()));
        }
        let all = [self.x1, self.x2, self.x3, self.eta3];
        if all.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(RegulusError::InvalidInput("non-finite coordinate".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypothesis {
    pub ok: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SixBallReport {
    /// Tangency: every normal has length `r`.
    pub a: Hypothesis,
    /// Disjointness of `B1 u B2 u B3` and `B1' u B2' u B3'`.
    pub b: Hypothesis,
    /// `0 < |x1 - x2| < 2r`.
    pub c: Hypothesis,
    /// `x3` is equidistant from `x1`, `x2` and within half a chord of the
    /// midpoint.
    pub d: Hypothesis,
    /// The line of centres through `x3` lies in the plane of `x1, x2, x3`.
    pub e: Hypothesis,
    pub first_failing: Option<char>,
    pub hypotheses_ok: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub bound_satisfied: bool,
    /// Normals actually used for the first two pairs.
    #[serde(skip)]
    pub eta1: Vec3,
    #[serde(skip)]
    pub eta2: Vec3,
}

/// Evaluates the hypotheses and the sagitta bound `|x3 - mid| <= phi(|x1 - x2|)`.
pub fn six_ball_check(cfg: &SixBallConfig) -> Result<SixBallReport> {
    cfg.validate()?;
    let r = cfg.r.get();
    let tol = DEFAULT_REL * r;
    let s = (cfg.x2 - cfg.x1).norm();
    let mid = (cfg.x1 + cfg.x2) * 0.5;
    let lhs = (cfg.x3 - mid).norm();
    let rhs = if s <= 2.0 * r { phi_unchecked(s, r) } else { f64::NAN };

    let (e1, e2) = plane_basis(cfg);
    let (eta1, eta2) = match (cfg.eta1, cfg.eta2) {
        (Some(a), Some(b)) => (a, b),
        (given1, given2) => complete_normals(cfg, given1, given2, e1, e2),
    };

    let a_defect = [eta1, eta2, cfg.eta3]
        .iter()
        .map(|v| (v.norm() - r).abs())
        .fold(0.0, f64::max);
    let b_defect = overlap_defect(cfg, &eta1, &eta2);
    let c_defect = if s >= 2.0 * r {
        s - 2.0 * r
    } else if s == 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let d_defect = ((cfg.x3 - cfg.x1).norm() - (cfg.x3 - cfg.x2).norm())
        .abs()
        .max(lhs - s / 2.0)
        .max(0.0);
    let e_defect = off_plane(cfg);

    let flag = |defect: f64| Hypothesis {
        ok: defect <= tol,
        defect,
    };
    let hyps = [
        ('a', flag(a_defect)),
        ('b', flag(b_defect)),
        ('c', flag(c_defect)),
        ('d', flag(d_defect)),
        ('e', flag(e_defect)),
    ];
    let first_failing = hyps.iter().find(|(_, h)| !h.ok).map(|(c, _)| *c);
    Ok(SixBallReport {
        a: hyps[0].1,
        b: hyps[1].1,
        c: hyps[2].1,
        d: hyps[3].1,
        e: hyps[4].1,
        first_failing,
        hypotheses_ok: first_failing.is_none(),
        lhs,
        rhs,
        bound_satisfied: lhs <= rhs + tol,
        eta1,
        eta2,
    })
}

/// Worst overlap `max(0, 2r - |c_i - c'_j|)` between a ball of the first union
/// and one of the second. Open balls of radius `r` are disjoint exactly when
/// their centres are at least `2r` apart.
fn overlap_defect(cfg: &SixBallConfig, eta1: &Vec3, eta2: &Vec3) -> f64 {
    let r = cfg.r.get();
    let xs = [cfg.x1, cfg.x2, cfg.x3];
    let etas = [*eta1, *eta2, cfg.eta3];
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let c = xs[i] + etas[i];
        for j in 0..3 {
            let c_out = xs[j] - etas[j];
            worst = worst.max(2.0 * r - (c - c_out).norm());
        }
    }
    worst
}

fn off_plane(cfg: &SixBallConfig) -> f64 {
    let u = cfg.x2 - cfg.x1;
    let v = cfg.x3 - cfg.x1;
    let n = u.cross(&v);
    let scale = u.norm() * v.norm();
    if n.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        // Collinear points: some plane through the line contains eta3.
        return 0.0;
    }
    cfg.eta3.dot(&n).abs() / n.norm()
}

/// Orthonormal basis of the plane in which missing normals are searched.
fn plane_basis(cfg: &SixBallConfig) -> (Vec3, Vec3) {
    let e1 = (cfg.x2 - cfg.x1).normalize();
    for cand in [cfg.x3 - cfg.x1, cfg.eta3, Vec3::y(), Vec3::z(), Vec3::x()] {
        let w = cand - e1 * e1.dot(&cand);
        if w.norm() > 1e-9 * cand.norm().max(1e-300) {
            return (e1, w.normalize());
        }
    }
    unreachable!("three coordinate axes cannot all be parallel to e1")
}

fn complete_normals(
    cfg: &SixBallConfig,
    given1: Option<Vec3>,
    given2: Option<Vec3>,
    e1: Vec3,
    e2: Vec3,
) -> (Vec3, Vec3) {
    let r = cfg.r.get();
    let dir = |t: f64| (e1 * t.cos() + e2 * t.sin()) * r;
    let angle = |v: Vec3| v.dot(&e2).atan2(v.dot(&e1));
    let eval = |a1: f64, a2: f64| {
        let n1 = given1.unwrap_or_else(|| dir(a1));
        let n2 = given2.unwrap_or_else(|| dir(a2));
        overlap_defect(cfg, &n1, &n2)
    };

    // Seeds that make B_i or B_i' share a centre with B3 or B3'.
    let c3 = cfg.x3 + cfg.eta3;
    let c3_out = cfg.x3 - cfg.eta3;
    let mut seeds1 = Vec::new();
    let mut seeds2 = Vec::new();
    for (x, seeds) in [(cfg.x1, &mut seeds1), (cfg.x2, &mut seeds2)] {
        for v in [c3 - x, x - c3_out, cfg.eta3] {
            if v.norm() > 0.0 {
                seeds.push(angle(v));
            }
        }
    }
    const GRID: usize = 360;
    for k in 0..GRID {
        let t = 2.0 * std::f64::consts::PI * k as f64 / GRID as f64;
        seeds1.push(t);
        seeds2.push(t);
    }

    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &a1 in &seeds1 {
        for &a2 in &seeds2 {
            let d = eval(a1, a2);
            if d < best.0 {
                best = (d, a1, a2);
            }
        }
    }

    // Compass search around the best seed.
    let (mut f, mut a1, mut a2) = best;
    let mut step = 2.0 * std::f64::consts::PI / GRID as f64;
    while step > 1e-14 && f > 0.0 {
        let mut moved = false;
        for (d1, d2) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let g = eval(a1 + d1, a2 + d2);
            if g < f {
                f = g;
                a1 += d1;
                a2 += d2;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (given1.unwrap_or_else(|| dir(a1)), given2.unwrap_or_else(|| dir(a2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn on_circle(t: f64) -> Vec3 {
        Vec3::new(t.cos(), t.sin(), 0.0)
    }

    #[test]
    fn points_on_an_r_circle_attain_the_bound() {
        let x3 = on_circle(PI / 6.0);
        let cfg = SixBallConfig::new(on_circle(0.0), on_circle(PI / 3.0), x3, -x3, Radius::new(1.0).unwrap()).unwrap();
        let rep = six_ball_check(&cfg).unwrap();
        assert!(rep.hypotheses_ok, "{rep:?}");
        assert!(rep.bound_satisfied);
        assert!((rep.lhs - rep.rhs).abs() < 1e-12);
        assert!((rep.rhs - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn flat_configuration_has_zero_sagitta() {
        let cfg = SixBallConfig::new(
            Vec3::new(-0.5, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::zeros(),
            Vec3::y(),
            Radius::new(1.0).unwrap(),
        )
        .unwrap();
        let rep = six_ball_check(&cfg).unwrap();
        assert!(rep.hypotheses_ok);
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.bound_satisfied);
    }

    #[test]
    fn deep_midpoint_breaks_disjointness() {
        let cfg = SixBallConfig::new(
            Vec3::new(-0.5, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(0.0, 0.4, 0.0),
            -Vec3::y(),
            Radius::new(1.0).unwrap(),
        )
        .unwrap();
        let rep = six_ball_check(&cfg).unwrap();
        assert!(!rep.bound_satisfied);
        assert_eq!(rep.first_failing, Some('b'));
        assert!(rep.c.ok && rep.d.ok && rep.e.ok);
        assert!(rep.b.defect > 1e-3);
    }

    #[test]
    fn normal_out_of_plane_fails_e() {
        let cfg = SixBallConfig::new(
            Vec3::new(-0.5, 0.0, 0.0),
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(0.0, 0.1, 0.0),
            Vec3::z(),
            Radius::new(1.0).unwrap(),
        )
        .unwrap();
        let rep = six_ball_check(&cfg).unwrap();
        assert!(!rep.e.ok);
        assert!((rep.e.defect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_config_is_rejected() {
        let r = Radius::new(1.0).unwrap();
        assert!(SixBallConfig::new(Vec3::zeros(), Vec3::zeros(), Vec3::x(), Vec3::y(), r).is_err());
        assert!(SixBallConfig::new(Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::y() * 2.0, r).is_err());
    }
}
