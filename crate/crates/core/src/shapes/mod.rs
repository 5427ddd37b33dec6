//! Builtin shapes with exact normals and known reach, implicit shapes, and
//! file formats.

pub mod curve;
pub mod expr;
pub mod io;
pub mod level_set;

use serde::{Deserialize, Serialize};

use crate::boundary::{Boundary, Vec3};
use crate::error::{RegulusError, Result};
use crate::normal_field::ImplicitField;
use curve::{arc_distance, ClosedCurve, Ellipse, PiecewiseLoop};
use expr::Expr;
use level_set::{extract_level_set, Bounds};

/// Shape families. Dimensions are lengths in the shape's own units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ShapeKind {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    RoundedRectangle {
        width: f64,
        height: f64,
        fillet: f64,
    },
    Dumbbell {
        disk_r: f64,
        center_gap: f64,
        neck_gap: f64,
        fillet: f64,
    },
    /// Zero set of `expr` (with `U = {expr < 0}`) inside `bounds`.
    Implicit {
        expr: String,
        bounds: Bounds,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

fn default_grid() -> usize {
    512
}

impl ShapeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Circle { .. } => "circle",
            ShapeKind::Ellipse { .. } => "ellipse",
            ShapeKind::Annulus { .. } => "annulus",
            ShapeKind::RoundedRectangle { .. } => "rounded_rectangle",
            ShapeKind::Dumbbell { .. } => "dumbbell",
            ShapeKind::Implicit { .. } => "implicit",
        }
    }

    /// Sample count used when none is given.
    pub fn default_samples(&self) -> usize {
        match self {
            ShapeKind::Circle { .. } => 2000,
            ShapeKind::Ellipse { .. } | ShapeKind::Dumbbell { .. } => 4000,
            _ => 3000,
        }
    }

    /// Largest radius of regularity, for the builtin families.
    pub fn exact_reach(&self) -> Option<f64> {
        match *self {
            ShapeKind::Circle { radius } => Some(radius),
            ShapeKind::Ellipse { a, b } => Some(a.min(b).powi(2) / a.max(b)),
            ShapeKind::Annulus { r_in, r_out } => Some(r_in.min(0.5 * (r_out - r_in))),
            ShapeKind::RoundedRectangle { width, height, fillet } => Some(fillet.min(0.5 * width).min(0.5 * height)),
            ShapeKind::Dumbbell {
                disk_r,
                neck_gap,
                fillet,
                ..
            } => Some((0.5 * neck_gap).min(fillet).min(disk_r)),
            ShapeKind::Implicit { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(RegulusError::InvalidInput(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            ShapeKind::Circle { radius } => positive("radius", radius),
            ShapeKind::Ellipse { a, b } => positive("a", a).and(positive("b", b)),
            ShapeKind::Annulus { r_in, r_out } => {
                positive("r_in", r_in)?;
                positive("r_out", r_out)?;
                if r_out <= r_in {
                    return Err(RegulusError::InvalidInput(format!(
                        "outer radius {r_out} must exceed inner radius {r_in}"
                    )));
                }
                Ok(())
            }
            ShapeKind::RoundedRectangle { width, height, fillet } => {
                positive("width", width)?;
                positive("height", height)?;
                positive("fillet", fillet)?;
                if 2.0 * fillet > width.min(height) {
                    return Err(RegulusError::InvalidInput(format!(
                        "fillet {fillet} does not fit a {width} x {height} rectangle"
                    )));
                }
                Ok(())
            }
            ShapeKind::Dumbbell { .. } | ShapeKind::Implicit { .. } => Ok(()),
        }
    }
}

/// A shape together with sampling density and normal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub kind: ShapeKind,
    /// Number of samples for builtins; ignored for implicit shapes.
    #[serde(default)]
    pub n: Option<usize>,
    /// Length of the scaled normals.
    #[serde(default = "default_r")]
    pub r: f64,
}

fn default_r() -> f64 {
    1.0
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        Self { kind, n: None, r: 1.0 }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn samples(&self) -> usize {
        self.n.unwrap_or_else(|| self.kind.default_samples())
    }
}

/// Exact geometry of a builtin shape, for use as a test oracle.
pub struct GroundTruth {
    pub exact_reach: f64,
    loops: Vec<Box<dyn ClosedCurve>>,
}

impl std::fmt::Debug for GroundTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroundTruth")
            .field("exact_reach", &self.exact_reach)
            .field("loops", &self.loops.len())
            .finish()
    }
}

impl GroundTruth {
    fn closest(&self, p: &Vec3) -> (usize, f64, f64) {
        self.loops
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let (s, d) = c.locate(p);
                (k, s, d)
            })
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .expect("at least one loop")
    }

    /// Outward unit normal at the boundary point closest to `p`.
    pub fn exact_normal(&self, p: &Vec3) -> Vec3 {
        let (k, s, _) = self.closest(p);
        self.loops[k].at(s).1
    }

    /// Distance from `p` to the exact boundary.
    pub fn distance(&self, p: &Vec3) -> f64 {
        self.closest(p).2
    }

    /// Intrinsic distance between the boundary points closest to `p` and
    /// `q`; infinite across components.
    pub fn exact_intrinsic(&self, p: &Vec3, q: &Vec3) -> f64 {
        let (kp, sp, _) = self.closest(p);
        let (kq, sq, _) = self.closest(q);
        if kp != kq {
            return f64::INFINITY;
        }
        arc_distance(self.loops[kp].length(), sp, sq)
    }

    pub fn perimeter(&self) -> f64 {
        self.loops.iter().map(|c| c.length()).sum()
    }
}

/// Output of [`generate`].
#[derive(Debug)]
pub struct Generated {
    pub boundary: Boundary,
    /// Present for the builtin families.
    pub truth: Option<GroundTruth>,
}

fn curves(kind: &ShapeKind) -> Result<Vec<Box<dyn ClosedCurve>>> {
    let pw = |pieces| -> Result<Box<dyn ClosedCurve>> { Ok(Box::new(PiecewiseLoop::new(pieces)?)) };
    Ok(match *kind {
        ShapeKind::Circle { radius } => vec![pw(vec![curve::circle(radius, true)])?],
        ShapeKind::Ellipse { a, b } => vec![Box::new(Ellipse::new(a, b)?)],
        ShapeKind::Annulus { r_in, r_out } => vec![
            pw(vec![curve::circle(r_out, true)])?,
            pw(vec![curve::circle(r_in, false)])?,
        ],
        ShapeKind::RoundedRectangle { width, height, fillet } => {
            vec![pw(curve::rounded_rectangle(width, height, fillet))?]
        }
        ShapeKind::Dumbbell {
            disk_r,
            center_gap,
            neck_gap,
            fillet,
        } => vec![pw(curve::dumbbell(disk_r, center_gap, neck_gap, fillet)?)?],
        ShapeKind::Implicit { .. } => Vec::new(),
    })
}

/// Exact geometry of a builtin kind.
pub fn ground_truth(kind: &ShapeKind) -> Result<Option<GroundTruth>> {
    kind.validate()?;
    let Some(exact_reach) = kind.exact_reach() else {
        return Ok(None);
    };
    Ok(Some(GroundTruth {
        exact_reach,
        loops: curves(kind)?,
    }))
}

/// Samples a shape: equal arclength spacing with exact normals for the
/// builtins (samples split between loops in proportion to their length),
/// marching squares for implicit shapes.
pub fn generate(spec: &ShapeSpec) -> Result<Generated> {
    spec.kind.validate()?;
    if !(spec.r > 0.0 && spec.r.is_finite()) {
        return Err(RegulusError::InvalidInput(format!(
            "r must be positive, got {}",
            spec.r
        )));
    }
    if let ShapeKind::Implicit { expr, bounds, grid } = &spec.kind {
        let f = Expr::parse(expr)?;
        let boundary = extract_level_set(&f, *bounds, *grid, spec.r)?;
        return Ok(Generated { boundary, truth: None });
    }
    let truth = ground_truth(&spec.kind)?.expect("builtin");
    let n = spec.samples();
    let total = truth.perimeter();
    let mut left = n;
    let count = truth.loops.len();
    let mut loops = Vec::with_capacity(count);
    for (k, c) in truth.loops.iter().enumerate() {
        let m = if k + 1 == count {
            left
        } else {
            ((n as f64) * c.length() / total).round() as usize
        };
        if m < 3 {
            return Err(RegulusError::InvalidInput(format!(
                "{n} samples are too few for a {}",
                spec.kind.name()
            )));
        }
        left -= m.min(left);
        loops.push(c.sample(m).into_iter().map(|(p, nrm)| (p, nrm * spec.r)).collect());
    }
    let boundary = Boundary::from_loops(2, loops)?;
    Ok(Generated {
        boundary,
        truth: Some(truth),
    })
}

/// Signed distance to a builtin shape's boundary (negative inside), with
/// the exact gradient: the outward normal at the closest point.
pub struct SignedDistance {
    truth: GroundTruth,
}

impl SignedDistance {
    pub fn new(kind: &ShapeKind) -> Result<Self> {
        let truth = ground_truth(kind)?
            .ok_or_else(|| RegulusError::InvalidInput("signed distance needs a builtin shape".into()))?;
        Ok(Self { truth })
    }

    fn eval(&self, p: &Vec3) -> (f64, Vec3) {
        let (k, s, d) = self.truth.closest(p);
        let (q, n) = self.truth.loops[k].at(s);
        let sign = if (p - q).dot(&n) < 0.0 { -1.0 } else { 1.0 };
        (sign * d, n)
    }
}

impl ImplicitField for SignedDistance {
    fn value(&self, p: &Vec3) -> f64 {
        self.eval(p).0
    }

    fn gradient(&self, p: &Vec3) -> Vec3 {
        self.eval(p).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dumbbell() -> ShapeKind {
        ShapeKind::Dumbbell {
            disk_r: 2.0,
            center_gap: 10.0,
            neck_gap: 0.2,
            fillet: 0.5,
        }
    }

    #[test]
    fn builtins_have_exact_normals() {
        let kinds = [
            ShapeKind::Circle { radius: 1.0 },
            ShapeKind::Ellipse { a: 2.0, b: 1.0 },
            ShapeKind::Annulus { r_in: 1.0, r_out: 2.5 },
            ShapeKind::RoundedRectangle {
                width: 4.0,
                height: 2.0,
                fillet: 0.5,
            },
            dumbbell(),
        ];
        for k in kinds {
            let g = generate(&ShapeSpec::new(k.clone()).with_samples(1000).with_r(0.7)).unwrap();
            let t = g.truth.unwrap();
            assert_eq!(g.boundary.len(), 1000);
            for s in g.boundary.samples() {
                assert!(t.distance(&s.point) < 1e-12, "{k:?}");
                assert!((t.exact_normal(&s.point) * 0.7 - s.eta).norm() < 1e-12, "{k:?}");
            }
        }
    }

    #[test]
    fn reaches() {
        assert_eq!(ShapeKind::Ellipse { a: 2.0, b: 1.0 }.exact_reach(), Some(0.5));
        assert_eq!(ShapeKind::Annulus { r_in: 1.0, r_out: 2.5 }.exact_reach(), Some(0.75));
        assert!((dumbbell().exact_reach().unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn annulus_splits_samples_by_length() {
        let g = generate(&ShapeSpec::new(ShapeKind::Annulus { r_in: 1.0, r_out: 2.5 }).with_samples(700)).unwrap();
        assert_eq!(g.boundary.n_components(), 2);
        assert_eq!(g.boundary.len(), 700);
        let t = g.truth.unwrap();
        let inner = g
            .boundary
            .samples()
            .iter()
            .find(|s| (s.point.norm() - 1.0).abs() < 1e-12)
            .unwrap();
        assert!(inner.eta.dot(&inner.point) < 0.0);
        assert!(t
            .exact_intrinsic(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(2.5, 0.0, 0.0))
            .is_infinite());
    }

    #[test]
    fn invalid_specs() {
        let bad = ShapeKind::Dumbbell {
            disk_r: 2.0,
            center_gap: 10.0,
            neck_gap: 5.0,
            fillet: 0.5,
        };
        assert!(generate(&ShapeSpec::new(bad)).is_err());
        assert!(generate(&ShapeSpec::new(ShapeKind::Circle { radius: -1.0 })).is_err());
        let rr = ShapeKind::RoundedRectangle {
            width: 1.0,
            height: 1.0,
            fillet: 0.6,
        };
        assert!(generate(&ShapeSpec::new(rr)).is_err());
    }

    #[test]
    fn spec_from_toml_like_json() {
        let spec: ShapeSpec = serde_json::from_str(
            r#"{"shape": "dumbbell", "disk_r": 2, "center_gap": 10, "neck_gap": 0.2, "fillet": 0.5, "n": 4000, "r": 0.5}"#,
        )
        .unwrap();
        assert_eq!(spec.kind, dumbbell());
        assert_eq!(spec.samples(), 4000);
    }

    #[test]
    fn implicit_dumbbell_matches_builtin() {
        let sdf = SignedDistance::new(&dumbbell()).unwrap();
        let bounds = Bounds::new(-7.5, -2.5, 7.5, 2.5).unwrap();
        let grid = 1500;
        let cell = 15.0 / grid as f64;
        let b = extract_level_set(&sdf, bounds, grid, 0.5).unwrap();
        let truth = ground_truth(&dumbbell()).unwrap().unwrap();
        for s in b.samples() {
            assert!(truth.distance(&s.point) < 2.0 * cell);
        }
        let built = generate(&ShapeSpec::new(dumbbell()).with_samples(4000))
            .unwrap()
            .boundary;
        let ix = crate::index::IndexedBoundary::new(b).unwrap();
        for s in built.samples().iter().step_by(7) {
            let (_, d) = ix.grid().nearest(&s.point).unwrap();
            assert!(d < 2.0 * cell);
        }
    }
}
