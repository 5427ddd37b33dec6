//! The scaled normal field: construction from implicit functions, its local
//! Lipschitz constant, normality defect and the almost-orthogonality
//! inequalities that follow from `|eta| = r` and `Lip(eta) <= 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{BoundarySample, Vec3};
use crate::error::{RegulusError, Result};
use crate::index::IndexedBoundary;
use crate::intrinsic::Dijkstra;
use crate::tolerance::Tolerances;

/// Scalar field whose zero set is the boundary, with `U = {f < 0}`.
pub trait ImplicitField: Sync {
    fn value(&self, p: &Vec3) -> f64;

    /// Gradient of the field. The default uses central differences.
    fn gradient(&self, p: &Vec3) -> Vec3 {
        let h = 1e-6 * (1.0 + p.norm());
        let mut g = Vec3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            g[k] = (self.value(&(p + e)) - self.value(&(p - e))) / (2.0 * h);
        }
        g
    }
}

/// Implicit field from a closure, with an optional analytic gradient.
pub struct FnField<F, G = fn(&Vec3) -> Vec3> {
    value: F,
    gradient: Option<G>,
}

impl<F: Fn(&Vec3) -> f64 + Sync> FnField<F> {
    pub fn new(value: F) -> Self {
        Self { value, gradient: None }
    }
}

impl<F: Fn(&Vec3) -> f64 + Sync, G: Fn(&Vec3) -> Vec3 + Sync> FnField<F, G> {
    pub fn with_gradient(value: F, gradient: G) -> Self {
        Self {
            value,
            gradient: Some(gradient),
        }
    }
}

impl<F: Fn(&Vec3) -> f64 + Sync, G: Fn(&Vec3) -> Vec3 + Sync> ImplicitField for FnField<F, G> {
    fn value(&self, p: &Vec3) -> f64 {
        (self.value)(p)
    }

    fn gradient(&self, p: &Vec3) -> Vec3 {
        match &self.gradient {
            Some(g) => g(p),
            None => {
                let h = 1e-6 * (1.0 + p.norm());
                let mut g = Vec3::zeros();
                for k in 0..3 {
                    let mut e = Vec3::zeros();
                    e[k] = h;
                    g[k] = ((self.value)(&(p + e)) - (self.value)(&(p - e))) / (2.0 * h);
                }
                g
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitOptions {
    /// Largest accepted `|f|` at an input point.
    pub surface_tol: f64,
    /// Smallest accepted `|grad f|`.
    pub gradient_floor: f64,
}

impl Default for ImplicitOptions {
    fn default() -> Self {
        Self {
            surface_tol: 1e-6,
            gradient_floor: 1e-10,
        }
    }
}

/// Samples `eta_i = r grad f(x_i) / |grad f(x_i)|`.
pub fn normals_from_implicit(
    field: &dyn ImplicitField,
    points: &[Vec3],
    r: f64,
    opts: &ImplicitOptions,
) -> Result<Vec<BoundarySample>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(RegulusError::domain("normals_from_implicit", r, "(0, inf)"));
    }
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let v = field.value(p);
            if !(v.abs() <= opts.surface_tol) {
                return Err(RegulusError::OffSurface {
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    value: v.abs(),
                    tolerance: opts.surface_tol,
                });
            }
            let g = field.gradient(p);
            let norm = g.norm();
            if !(norm > opts.gradient_floor) {
                return Err(RegulusError::SingularGradient {
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    norm,
                });
            }
            Ok(BoundarySample {
                index,
                point: *p,
                eta: g * (r / norm),
            })
        })
        .collect()
}

/// Worst pair of a ratio scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstPair {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

fn keep_max(a: Option<WorstPair>, b: Option<WorstPair>) -> Option<WorstPair> {
    match (a, b) {
        (Some(x), Some(y)) => Some(
            if y.value > x.value || (y.value == x.value && (y.i, y.j) < (x.i, x.j)) {
                y
            } else {
                x
            },
        ),
        (x, None) => x,
        (None, y) => y,
    }
}

fn keep_min(a: Option<WorstPair>, b: Option<WorstPair>) -> Option<WorstPair> {
    match (a, b) {
        (Some(x), Some(y)) => Some(
            if y.value < x.value || (y.value == x.value && (y.i, y.j) < (x.i, x.j)) {
                y
            } else {
                x
            },
        ),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Offsets at which the fiber separation inequality is checked.
pub const SEPARATION_TS: [f64; 6] = [-0.4, -0.25, -0.1, 0.1, 0.25, 0.4];

#[derive(Debug, Clone, Default)]
struct LocalStats {
    pairs: usize,
    lip: Option<WorstPair>,
    identity: f64,
    separation: [Option<WorstPair>; 6],
}

impl LocalStats {
    fn merge(mut self, o: LocalStats) -> LocalStats {
        self.pairs += o.pairs;
        self.lip = keep_max(self.lip, o.lip);
        self.identity = self.identity.max(o.identity);
        for k in 0..SEPARATION_TS.len() {
            self.separation[k] = keep_min(self.separation[k], o.separation[k]);
        }
        self
    }
}

/// `|<a, a - b> - |a - b|^2 / 2|`, which vanishes exactly when `|a| = |b|`.
pub fn identity_residual(a: &Vec3, b: &Vec3) -> f64 {
    let d = a - b;
    (a.dot(&d) - 0.5 * d.norm_squared()).abs()
}

/// Visits every pair within graph distance `r` of each other, skipping pairs
/// closer than `h/2` unless they share an edge.
fn scan_local(ix: &IndexedBoundary) -> LocalStats {
    let r = ix.r();
    let delta_min = 0.5 * ix.resolution_h();
    let g = ix.graph();
    let n = ix.len();
    (0..n)
        .into_par_iter()
        .fold(
            || (Dijkstra::new(n), LocalStats::default()),
            |(mut dj, mut st), i| {
                dj.run(g, i, r, None);
                let (xi, ei) = (ix.point(i), ix.eta(i));
                for &j in dj.settled() {
                    if j <= i {
                        continue;
                    }
                    let dx = xi - ix.point(j);
                    let e = dx.norm();
                    if e == 0.0 || (e < delta_min && !ix.is_adjacent(i, j)) {
                        continue;
                    }
                    let ej = ix.eta(j);
                    let de = ei - ej;
                    st.pairs += 1;
                    st.lip = keep_max(
                        st.lip,
                        Some(WorstPair {
                            i,
                            j,
                            value: de.norm() / e,
                        }),
                    );
                    st.identity = st.identity.max(identity_residual(&ei, &ej) / (r * r));
                    for (k, t) in SEPARATION_TS.iter().enumerate() {
                        let ratio = (dx + de * *t).norm() / e;
                        st.separation[k] = keep_min(st.separation[k], Some(WorstPair { i, j, value: ratio }));
                    }
                }
                (dj, st)
            },
        )
        .map(|(_, st)| st)
        .reduce(LocalStats::default, LocalStats::merge)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    /// `max |eta_i - eta_j| / |x_i - x_j|` over admissible pairs.
    pub lip_estimate: f64,
    pub worst_pair: (usize, usize),
    pub pairs_checked: usize,
}

/// Lipschitz constant of the scaled normal field over pairs of samples
/// within intrinsic distance `r`.
///
/// Comparing only nearby pairs (in the boundary's own metric) measures the
/// local constant, which is what regularity constrains; pairs that are close
/// in space but far along the boundary are the business of the
/// intrinsic-distance condition.
pub fn estimate_lipschitz(ix: &IndexedBoundary) -> Result<LipschitzEstimate> {
    if ix.len() < 2 {
        return Err(RegulusError::Degenerate(
            "the Lipschitz estimate needs at least two samples".into(),
        ));
    }
    let st = scan_local(ix);
    lipschitz_from(&st)
}

fn lipschitz_from(st: &LocalStats) -> Result<LipschitzEstimate> {
    let w = st
        .lip
        .ok_or_else(|| RegulusError::Degenerate("every sample pair is closer than half the resolution".into()))?;
    Ok(LipschitzEstimate {
        lip_estimate: w.value,
        worst_pair: (w.i, w.j),
        pairs_checked: st.pairs,
    })
}

/// Normality defect at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityDefect {
    pub scale: f64,
    pub max: f64,
    pub worst_index: Option<usize>,
    /// Samples without any other sample within `scale`.
    pub isolated: Vec<usize>,
    #[serde(skip)]
    pub per_point: Vec<f64>,
}

/// `defect(x) = max |<eta(x), y - x>| / (r |y - x|)` over samples `y` with
/// `|y - x| <= scale`.
pub fn normality_defect(ix: &IndexedBoundary, scale: f64) -> Result<NormalityDefect> {
    let h = ix.resolution_h();
    if !(scale >= h * (1.0 - 1e-12)) || !scale.is_finite() {
        return Err(RegulusError::domain("normality_defect", scale, format!("[{h}, inf)")));
    }
    let r = ix.r();
    let reach = scale * (1.0 + 1e-12);
    let per_point: Vec<Option<f64>> = (0..ix.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            let x = ix.point(i);
            let eta = ix.eta(i);
            ix.grid().within(&x, reach, buf);
            buf.iter()
                .filter(|&&j| j != i)
                .filter_map(|&j| {
                    let d = ix.point(j) - x;
                    let e = d.norm();
                    (e > 0.0).then(|| eta.dot(&d).abs() / (r * e))
                })
                .reduce(f64::max)
        })
        .collect();
    let mut max = 0.0;
    let mut worst_index = None;
    let mut isolated = Vec::new();
    for (i, d) in per_point.iter().enumerate() {
        match d {
            Some(v) if *v > max || worst_index.is_none() => {
                max = *v;
                worst_index = Some(i);
            }
            Some(_) => {}
            None => isolated.push(i),
        }
    }
    Ok(NormalityDefect {
        scale,
        max,
        worst_index,
        isolated,
        per_point: per_point.into_iter().map(|d| d.unwrap_or(0.0)).collect(),
    })
}

/// Defects at `scale`, `scale/2` and `scale/4`, keeping the scales the
/// sampling resolves, coarsest first.
pub fn normality_profile(ix: &IndexedBoundary, scale: f64) -> Result<Vec<NormalityDefect>> {
    let h = ix.resolution_h();
    let scales: Vec<f64> = [scale, scale / 2.0, scale / 4.0]
        .into_iter()
        .filter(|s| *s >= h * (1.0 - 1e-12))
        .collect();
    if scales.is_empty() {
        return Err(RegulusError::domain("normality_profile", scale, format!("[{h}, inf)")));
    }
    scales.into_iter().map(|s| normality_defect(ix, s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationCheck {
    pub t: f64,
    /// `sqrt(1 - 2|t|)`.
    pub bound: f64,
    /// Smallest `|x + t eta(x) - y - t eta(y)| / |x - y|` observed.
    pub min_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadradoReport {
    /// `max |<a, a-b> - |a-b|^2/2| / r^2` over checked pairs.
    pub identity_residual: f64,
    /// Residual allowed by rounding and the spread of normal lengths.
    pub identity_tolerance: f64,
    pub identity_ok: bool,
    /// `|eta(x) - eta(y)|^2 <= |x - y|^2`; evaluated only when the Lipschitz
    /// estimate is at most one.
    pub half_square_bound_ok: Option<bool>,
    pub separation: Vec<SeparationCheck>,
    pub separation_ok: bool,
    pub pairs_checked: usize,
}

fn quadrado_from(ix: &IndexedBoundary, st: &LocalStats, tol: &Tolerances) -> QuadradoReport {
    let r = ix.r();
    let eps = tol.eps_geo(ix.resolution_h(), r);
    let spread = ix
        .samples()
        .iter()
        .map(|s| (s.eta.norm_squared() / (r * r) - 1.0).abs())
        .fold(0.0, f64::max);
    let identity_tolerance = 8.0 * f64::EPSILON * 4.0 + spread;
    let lip = st.lip.map_or(0.0, |w| w.value);
    let half_square_bound_ok = (lip <= 1.0 + tol.rel).then_some(lip * lip <= 1.0 + 2.0 * tol.rel);
    let separation: Vec<SeparationCheck> = SEPARATION_TS
        .iter()
        .zip(&st.separation)
        .map(|(&t, w)| {
            let bound = (1.0 - 2.0 * t.abs()).sqrt();
            let min_ratio = w.map_or(f64::INFINITY, |w| w.value);
            SeparationCheck {
                t,
                bound,
                min_ratio,
                worst_pair: w.map(|w| (w.i, w.j)),
                ok: min_ratio >= bound - eps,
            }
        })
        .collect();
    QuadradoReport {
        identity_residual: st.identity,
        identity_tolerance,
        identity_ok: st.identity <= identity_tolerance,
        half_square_bound_ok,
        separation_ok: separation.iter().all(|s| s.ok),
        separation,
        pairs_checked: st.pairs,
    }
}

/// Checks the equal-norm identity, the half-square bound and the fiber
/// separation inequality `|x + t eta(x) - y - t eta(y)| >= sqrt(1 - 2|t|) |x - y|`
/// over locally paired samples.
pub fn quadrado_checks(ix: &IndexedBoundary, tol: &Tolerances) -> QuadradoReport {
    quadrado_from(ix, &scan_local(ix), tol)
}

/// Everything measured about the normal field in one pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldDefectReport {
    pub lip_estimate: f64,
    pub worst_pair: (usize, usize),
    pub pairs_checked: usize,
    /// Coarsest scale first.
    pub normality_defect: Vec<NormalityDefect>,
    pub identity_residual: f64,
    pub quadrado: QuadradoReport,
    /// Adjacent samples whose normals point in opposing directions.
    pub orientation_flips: Vec<(usize, usize)>,
}

/// Lipschitz estimate, normality profile from `4h` down to `h`, and the
/// quadrado checks.
pub fn field_defect_report(ix: &IndexedBoundary, tol: &Tolerances) -> Result<FieldDefectReport> {
    if ix.len() < 2 {
        return Err(RegulusError::Degenerate(
            "the normal field report needs at least two samples".into(),
        ));
    }
    let st = scan_local(ix);
    let lip = lipschitz_from(&st)?;
    let quadrado = quadrado_from(ix, &st, tol);
    let normality_defect = normality_profile(ix, 4.0 * ix.resolution_h())?;
    Ok(FieldDefectReport {
        lip_estimate: lip.lip_estimate,
        worst_pair: lip.worst_pair,
        pairs_checked: lip.pairs_checked,
        normality_defect,
        identity_residual: quadrado.identity_residual,
        quadrado,
        orientation_flips: ix.orientation_flips(),
    })
}
