//! Deciding r-regularity: the two conditions on the normal field and the
//! intrinsic distance, the direct tangent-ball oracle, and the bisection for
//! the largest certified radius.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{Boundary, BoundarySummary};
use crate::error::{RegulusError, Result};
use crate::geometry::Radius;
use crate::index::IndexedBoundary;
use crate::intrinsic::{Dijkstra, PairDistance};
use crate::normal_field::{estimate_lipschitz, normality_profile, NormalityDefect};
use crate::tolerance::Tolerances;

/// Witnesses re-checked on the densified boundary.
const CONFIRM_LIMIT: usize = 32;
/// Cap on the ratio margin, so that chord-connected pairs (ratio 1) never
/// qualify as witnesses at radii close to the sampling step.
const MAX_RATIO_MARGIN: f64 = 0.25;
/// Ball-oracle violations kept in a report.
const VIOLATION_LIMIT: usize = 32;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// Within the discretization budget of the threshold.
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Certified,
    Refuted,
    Inconclusive,
}

/// The discretization budgets in force for one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    pub rel: f64,
    pub eps_geo: f64,
    pub eps_len: f64,
    pub eps_tan: f64,
}

impl Budget {
    fn new(tol: &Tolerances, h: f64, r: f64) -> Self {
        Self {
            rel: tol.rel,
            eps_geo: tol.eps_geo(h, r),
            eps_len: tol.eps_len(h, r),
            eps_tan: tol.eps_tan(h, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition1 {
    /// Every `|eta|` equals `r` within the relative tolerance.
    pub norm_ok: bool,
    pub max_norm_defect: f64,
    pub lip_estimate: f64,
    pub worst_pair: (usize, usize),
    /// Coarsest scale first.
    pub normality_defect: Vec<NormalityDefect>,
    /// Allowed defect at the finest scale `s`: `s / 2r + eps_geo`.
    pub defect_threshold: f64,
    pub orientation_flips: Vec<(usize, usize)>,
    pub verdict: Verdict,
}

/// Condition (1): `eta` is a normal field of length `r` with `Lip(eta) <= 1`.
///
/// The Lipschitz estimate passes at `1 + rel`, fails beyond `1 + eps_geo`
/// and is inconclusive in between.
pub fn check_condition1(ix: &IndexedBoundary, r: Radius, tol: &Tolerances) -> Result<Condition1> {
    let ix = rescaled(ix, r)?;
    let rv = r.get();
    let h = ix.resolution_h();
    let b = Budget::new(tol, h, rv);
    let max_norm_defect = ix
        .samples()
        .iter()
        .map(|s| (s.eta.norm() - rv).abs() / rv)
        .fold(0.0, f64::max);
    let norm_ok = max_norm_defect <= tol.rel;
    let lip = estimate_lipschitz(&ix)?;
    let normality_defect = normality_profile(&ix, 4.0 * h)?;
    let finest = normality_defect.last().expect("at least one scale");
    let defect_threshold = finest.scale / (2.0 * rv) + b.eps_geo;
    let orientation_flips = ix.orientation_flips();

    let verdict = if !norm_ok
        || finest.max > defect_threshold
        || !orientation_flips.is_empty()
        || lip.lip_estimate > 1.0 + b.eps_geo
    {
        Verdict::Fail
    } else if lip.lip_estimate > 1.0 + tol.rel {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(Condition1 {
        norm_ok,
        max_norm_defect,
        lip_estimate: lip.lip_estimate,
        worst_pair: lip.worst_pair,
        normality_defect,
        defect_threshold,
        orientation_flips,
        verdict,
    })
}

/// A pair with `d >= (pi/2) e` and `e < 2r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    #[serde(flatten)]
    pub pair: PairDistance,
    /// Intrinsic distance on the densified boundary, when re-checked.
    #[serde(serialize_with = "crate::serde_util::finite_opt")]
    pub dense_intrinsic: Option<f64>,
    /// `None` when the witness was not re-checked.
    pub confirmed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition2 {
    pub checked_pairs: usize,
    /// Total number of witness pairs found.
    pub witness_count: usize,
    /// The closest witnesses (by Euclidean distance, then index), re-checked.
    pub witnesses: Vec<Witness>,
    /// Pairs with ratio at least `pi/2` whose distance is within `eps_len`
    /// of `2r`.
    pub marginal_pairs: usize,
    pub verdict: Verdict,
}

/// Condition (2): `d(x, y) >= (pi/2) |x - y|` implies `|x - y| >= 2r`.
///
/// A witness has `d >= (pi/2 - eps_geo) e` (margin capped at 1/4) and
/// `e < 2r - eps_len`; the closest witnesses are re-checked on a boundary
/// with every edge split in two. Pairs with `d >= (pi/2) e` and `e` within `eps_len` below `2r`
/// cannot be resolved at this sampling and make the verdict inconclusive.
pub fn check_condition2(ix: &IndexedBoundary, r: Radius, tol: &Tolerances) -> Result<Condition2> {
    let rv = r.get();
    let b = Budget::new(tol, ix.resolution_h(), rv);
    let margin = b.eps_geo.min(MAX_RATIO_MARGIN);
    let g = ix.graph();
    let n = ix.len();
    let per_source: Vec<(usize, Vec<PairDistance>, usize)> = (0..n)
        .into_par_iter()
        .map_init(
            || (Dijkstra::new(n), Vec::new()),
            |(dj, buf), i| {
                let xi = ix.point(i);
                ix.grid().within(&xi, 2.0 * rv, buf);
                let partners: Vec<(usize, f64)> = buf
                    .iter()
                    .filter(|&&j| j > i)
                    .map(|&j| (j, (ix.point(j) - xi).norm()))
                    .collect();
                if partners.is_empty() {
                    return (0, Vec::new(), 0);
                }
                let max_e = partners.iter().map(|p| p.1).fold(0.0, f64::max);
                dj.run(g, i, FRAC_PI_2 * max_e, None);
                let mut found = Vec::new();
                let mut marginal = 0;
                for &(j, e) in &partners {
                    let d = dj.dist(j);
                    if e < 2.0 * rv - b.eps_len {
                        if d >= (FRAC_PI_2 - margin) * e {
                            found.push(PairDistance::new(ix, g.step_cap(), i, j, d));
                        }
                    } else if d >= FRAC_PI_2 * e {
                        marginal += 1;
                    }
                }
                (partners.len(), found, marginal)
            },
        )
        .collect();

    let mut checked_pairs = 0;
    let mut marginal_pairs = 0;
    let mut all = Vec::new();
    for (c, w, m) in per_source {
        checked_pairs += c;
        marginal_pairs += m;
        all.extend(w);
    }
    all.sort_by(|a, b| {
        a.euclidean
            .total_cmp(&b.euclidean)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    let witness_count = all.len();
    all.truncate(CONFIRM_LIMIT);

    let witnesses = if all.is_empty() {
        Vec::new()
    } else {
        confirm(ix, &all, margin)?
    };
    let any_confirmed = witnesses.iter().any(|w| w.confirmed == Some(true));
    let verdict = if any_confirmed {
        Verdict::Fail
    } else if witness_count > 0 || marginal_pairs > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(Condition2 {
        checked_pairs,
        witness_count,
        witnesses,
        marginal_pairs,
        verdict,
    })
}

fn confirm(ix: &IndexedBoundary, pairs: &[PairDistance], margin: f64) -> Result<Vec<Witness>> {
    let dense = IndexedBoundary::new(ix.boundary().densified()?)?;
    let g = dense.graph();
    Ok(pairs
        .par_iter()
        .map_init(
            || (Dijkstra::new(dense.len()), Dijkstra::new(ix.len())),
            |(dj, coarse), p| {
                let same = g.component(p.i) == g.component(p.j);
                let d = if same {
                    dj.run(g, p.i, f64::INFINITY, Some(p.j));
                    dj.dist(p.j)
                } else {
                    f64::INFINITY
                };
                // The scan stops at (pi/2) e; report the full distance.
                let mut pair = *p;
                if same && !pair.intrinsic.is_finite() {
                    coarse.run(ix.graph(), p.i, f64::INFINITY, Some(p.j));
                    pair = PairDistance::new(ix, ix.graph().step_cap(), p.i, p.j, coarse.dist(p.j));
                }
                Witness {
                    pair,
                    dense_intrinsic: Some(d),
                    confirmed: Some(d >= (FRAC_PI_2 - margin) * p.euclidean),
                }
            },
        )
        .collect())
}

/// A sample strictly inside a tangent ball of another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallViolation {
    /// Sample whose tangent ball is violated.
    pub sample: usize,
    pub side: Side,
    /// Deepest intruding sample.
    pub intruder: usize,
    /// How far inside the ball the intruder sits.
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallOracle {
    pub violation_count: usize,
    /// Deepest violations first.
    pub violations: Vec<BallViolation>,
    pub verdict: Verdict,
}

/// Direct check that no sample lies strictly inside `B(x + eta(x), r)` or
/// `B(x - eta(x), r)` for any sample `x`, with strictness margin `eps_tan`.
pub fn ball_oracle(ix: &IndexedBoundary, r: Radius, tol: &Tolerances) -> Result<BallOracle> {
    let ix = rescaled(ix, r)?;
    let rv = r.get();
    let lim = rv - tol.eps_tan(ix.resolution_h(), rv);
    let found: Vec<Vec<BallViolation>> = (0..ix.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let mut out = Vec::new();
            for (side, sign) in [(Side::Inner, -1.0), (Side::Outer, 1.0)] {
                let c = ix.point(i) + ix.eta(i) * sign;
                ix.grid().within(&c, lim.max(0.0), buf);
                let deepest = buf
                    .iter()
                    .map(|&j| (j, (ix.point(j) - c).norm()))
                    .filter(|&(_, d)| d < lim)
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                if let Some((j, d)) = deepest {
                    out.push(BallViolation {
                        sample: i,
                        side,
                        intruder: j,
                        depth: rv - d,
                    });
                }
            }
            out
        })
        .collect();
    let mut violations: Vec<BallViolation> = found.into_iter().flatten().collect();
    violations.sort_by(|a, b| {
        b.depth
            .total_cmp(&a.depth)
            .then(a.sample.cmp(&b.sample))
            .then((a.side as u8).cmp(&(b.side as u8)))
    });
    let violation_count = violations.len();
    violations.truncate(VIOLATION_LIMIT);
    Ok(BallOracle {
        violation_count,
        violations,
        verdict: if violation_count == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}

/// Concrete evidence against regularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Normal field stretches more than the radius allows.
    Lipschitz { i: usize, j: usize, ratio: f64 },
    /// Close pair far apart along the boundary.
    IntrinsicDistance {
        i: usize,
        j: usize,
        euclidean: f64,
        #[serde(serialize_with = "crate::serde_util::finite")]
        intrinsic: f64,
    },
    /// Sample inside a tangent ball.
    TangentBall {
        sample: usize,
        side: Side,
        intruder: usize,
        depth: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub r_tested: f64,
    pub boundary: BoundarySummary,
    pub tolerances: Budget,
    pub cond1: Condition1,
    pub cond2: Condition2,
    pub ball_oracle: BallOracle,
    pub overall: Overall,
    pub witnesses: Vec<Evidence>,
}

impl RegularityReport {
    /// Verdict of the two-condition characterization alone.
    pub fn conditions(&self) -> Verdict {
        match (self.cond1.verdict, self.cond2.verdict) {
            (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            _ => Verdict::Inconclusive,
        }
    }
}

fn rescaled(ix: &IndexedBoundary, r: Radius) -> Result<IndexedBoundary> {
    if ix.r() == r.get() {
        Ok(ix.clone())
    } else {
        ix.with_radius(r.get())
    }
}

/// Runs both conditions and the ball oracle at radius `r`.
///
/// Certified when all three pass; refuted when any of them produced a
/// concrete witness; inconclusive otherwise.
pub fn certify(ix: &IndexedBoundary, r: Radius, tol: &Tolerances) -> Result<RegularityReport> {
    let ix = rescaled(ix, r)?;
    let rv = r.get();
    let cond1 = check_condition1(&ix, r, tol)?;
    let cond2 = check_condition2(&ix, r, tol)?;
    let ball_oracle = ball_oracle(&ix, r, tol)?;

    let mut witnesses = Vec::new();
    if cond1.verdict == Verdict::Fail && cond1.lip_estimate > 1.0 {
        witnesses.push(Evidence::Lipschitz {
            i: cond1.worst_pair.0,
            j: cond1.worst_pair.1,
            ratio: cond1.lip_estimate,
        });
    }
    witnesses.extend(cond2.witnesses.iter().filter(|w| w.confirmed == Some(true)).map(|w| {
        Evidence::IntrinsicDistance {
            i: w.pair.i,
            j: w.pair.j,
            euclidean: w.pair.euclidean,
            intrinsic: w.pair.intrinsic,
        }
    }));
    witnesses.extend(ball_oracle.violations.iter().map(|v| Evidence::TangentBall {
        sample: v.sample,
        side: v.side,
        intruder: v.intruder,
        depth: v.depth,
    }));

    let all_pass = cond1.verdict.passed() && cond2.verdict.passed() && ball_oracle.verdict.passed();
    let any_fail = [cond1.verdict, cond2.verdict, ball_oracle.verdict].contains(&Verdict::Fail);
    let overall = if all_pass {
        Overall::Certified
    } else if any_fail && !witnesses.is_empty() {
        Overall::Refuted
    } else {
        Overall::Inconclusive
    };
    Ok(RegularityReport {
        r_tested: rv,
        boundary: ix.summary(),
        tolerances: Budget::new(tol, ix.resolution_h(), rv),
        cond1,
        cond2,
        ball_oracle,
        overall,
        witnesses,
    })
}

/// Whether `certify` would return `Certified`, stopping at the first check
/// that does not pass.
pub fn is_certified(ix: &IndexedBoundary, r: Radius, tol: &Tolerances) -> Result<bool> {
    let ix = rescaled(ix, r)?;
    Ok(check_condition1(&ix, r, tol)?.verdict.passed()
        && ball_oracle(&ix, r, tol)?.verdict.passed()
        && check_condition2(&ix, r, tol)?.verdict.passed())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusEstimate {
    /// Largest radius found certified.
    pub r_lo: f64,
    /// Smallest radius found not certified.
    pub r_hi: f64,
    pub iterations: usize,
    pub rel_gap: f64,
}

/// Bisects for the largest certified radius, starting from the bracket
/// `[h, r_init_hi]` and doubling the upper end while it still certifies.
pub fn estimate_max_r(
    ix: &IndexedBoundary,
    r_init_hi: Radius,
    tol: &Tolerances,
    rel_gap: f64,
) -> Result<RadiusEstimate> {
    if !(rel_gap > 0.0 && rel_gap < 1.0) {
        return Err(RegulusError::domain("estimate_max_r", rel_gap, "(0, 1)"));
    }
    let h = ix.resolution_h();
    let mut iterations = 1;
    let radius = |r: f64| Radius::new(r);
    if !is_certified(ix, radius(h)?, tol)? {
        return Err(RegulusError::AllRefuted(h));
    }
    let mut lo = h;
    let mut hi = r_init_hi.get().max(h);
    loop {
        iterations += 1;
        if hi > lo && !is_certified(ix, radius(hi)?, tol)? {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if iterations > 64 {
            return Err(RegulusError::Degenerate(format!(
                "every radius up to {lo} certifies; the shape looks unbounded"
            )));
        }
    }
    while (hi - lo) / hi > rel_gap {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if is_certified(ix, radius(mid)?, tol)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RadiusEstimate {
        r_lo: lo,
        r_hi: hi,
        iterations,
        rel_gap: (hi - lo) / hi,
    })
}

/// Convenience wrapper indexing a plain boundary first.
pub fn certify_boundary(b: Boundary, r: Radius, tol: &Tolerances) -> Result<RegularityReport> {
    certify(&IndexedBoundary::new(b)?, r, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::Vec3;
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

    fn rad(r: f64) -> Radius {
        Radius::new(r).unwrap()
    }

    #[test]
    fn circle_conditions() {
        let ix = circle(2000);
        let tol = Tolerances::default();
        let c1 = check_condition1(&ix, rad(1.0), &tol).unwrap();
        assert_eq!(c1.verdict, Verdict::Pass, "{c1:?}");
        let c1 = check_condition1(&ix, rad(1.05), &tol).unwrap();
        assert_eq!(c1.verdict, Verdict::Fail);
        let c2 = check_condition2(&ix, rad(1.0), &tol).unwrap();
        assert_eq!(c2.verdict, Verdict::Pass, "{c2:?}");
        let c2 = check_condition2(&ix, rad(1e-3), &tol).unwrap();
        assert_eq!(c2.checked_pairs, 0);
        assert_eq!(c2.verdict, Verdict::Pass);
        assert!(ball_oracle(&ix, rad(1.0), &tol).unwrap().verdict.passed());
        assert!(!ball_oracle(&ix, rad(1.1), &tol).unwrap().verdict.passed());
    }

    #[test]
    fn circle_certify_and_refute() {
        let ix = circle(2000);
        let tol = Tolerances::default();
        let rep = certify(&ix, rad(0.99), &tol).unwrap();
        assert_eq!(rep.overall, Overall::Certified);
        assert!(rep.witnesses.is_empty());
        let rep = certify(&ix, rad(1.1), &tol).unwrap();
        assert_eq!(rep.overall, Overall::Refuted);
        assert_eq!(rep.cond2.verdict, Verdict::Fail);
        assert!(!rep.witnesses.is_empty());
    }

    #[test]
    fn circle_radius_estimate() {
        let ix = circle(2000);
        let est = estimate_max_r(&ix, rad(4.0), &Tolerances::default(), 0.01).unwrap();
        assert!(est.r_lo >= 0.98 && est.r_lo <= 1.0, "{est:?}");
        assert!(est.r_lo <= est.r_hi && est.rel_gap <= 0.01);
    }
}
