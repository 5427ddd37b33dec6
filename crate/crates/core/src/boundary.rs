//! Discrete stand-in for the boundary of a shape: samples, scaled normals and
//! a neighbour graph.

use serde::Serialize;

use crate::error::{RegulusError, Result};
use crate::tolerance::DEFAULT_REL;

pub type Vec3 = nalgebra::Vector3<f64>;

/// A boundary point paired with its scaled outward normal (`|eta| = r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub index: usize,
    pub point: Vec3,
    pub eta: Vec3,
}

/// Immutable sampled boundary.
///
/// Every sample carries a normal of the same length `r`; `adjacency` holds the
/// polyline or mesh edges and is always symmetric.
#[derive(Debug, Clone)]
pub struct Boundary {
    samples: Vec<BoundarySample>,
    r: f64,
    dim: usize,
    adjacency: Vec<Vec<usize>>,
    resolution_h: f64,
    component: Vec<usize>,
    n_components: usize,
}

/// Serializable summary used in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySummary {
    pub samples: usize,
    pub dim: usize,
    pub r: f64,
    pub resolution_h: f64,
    pub components: usize,
}

impl Boundary {
    /// Builds a boundary from points, scaled normals and undirected edges.
    ///
    /// All normals must share one length within the default relative
    /// tolerance; that length becomes `r`.
    pub fn new(
        dim: usize,
        points: Vec<Vec3>,
        etas: Vec<Vec3>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(RegulusError::InvalidInput(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if points.is_empty() {
            return Err(RegulusError::EmptyBoundary);
        }
        if points.len() != etas.len() {
            return Err(RegulusError::InvalidInput(format!(
                "{} points but {} normals",
                points.len(),
                etas.len()
            )));
        }
        let n = points.len();
        for (p, e) in points.iter().zip(&etas) {
            if !(p.iter().all(|c| c.is_finite()) && e.iter().all(|c| c.is_finite())) {
                return Err(RegulusError::InvalidInput("non-finite coordinate".into()));
            }
            if dim == 2 && (p.z != 0.0 || e.z != 0.0) {
                return Err(RegulusError::DimensionMismatch { expected: 2, found: 3 });
            }
        }
        let r = etas[0].norm();
        if !(r > 0.0) {
            return Err(RegulusError::InvalidInput("normal of zero length".into()));
        }
        if let Some((i, e)) = etas
            .iter()
            .enumerate()
            .find(|(_, e)| (e.norm() - r).abs() > DEFAULT_REL * r)
        {
            return Err(RegulusError::InvalidInput(format!(
                "normal {i} has length {} but sample 0 has {r}",
                e.norm()
            )));
        }

        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(RegulusError::IndexOutOfRange {
                    index: a.max(b),
                    len: n,
                });
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let mut resolution_h: f64 = 0.0;
        for (i, list) in adjacency.iter().enumerate() {
            for &j in list {
                resolution_h = resolution_h.max((points[i] - points[j]).norm());
            }
        }
        if !(resolution_h > 0.0) {
            return Err(RegulusError::Degenerate(
                "boundary needs at least one edge of positive length".into(),
            ));
        }

        let (component, n_components) = components(&adjacency);
        let samples = points
            .into_iter()
            .zip(etas)
            .enumerate()
            .map(|(index, (point, eta))| BoundarySample { index, point, eta })
            .collect();
        Ok(Self {
            samples,
            r,
            dim,
            adjacency,
            resolution_h,
            component,
            n_components,
        })
    }

    /// Builds a boundary made of closed polylines. Each loop is a list of
    /// `(point, eta)` pairs in traversal order.
    pub fn from_loops(dim: usize, loops: Vec<Vec<(Vec3, Vec3)>>) -> Result<Self> {
        let mut points = Vec::new();
        let mut etas = Vec::new();
        let mut edges = Vec::new();
        for lp in loops {
            let start = points.len();
            let m = lp.len();
            for (p, e) in lp {
                points.push(p);
                etas.push(e);
            }
            if m >= 2 {
                for k in 0..m {
                    let a = start + k;
                    let b = start + (k + 1) % m;
                    if m == 2 && k == 1 {
                        break;
                    }
                    edges.push((a, b));
                }
            }
        }
        Self::new(dim, points, etas, edges)
    }

    /// Builds an open polyline boundary (consecutive samples linked, no
    /// closing edge).
    pub fn from_open_polyline(dim: usize, points: Vec<Vec3>, etas: Vec<Vec3>) -> Result<Self> {
        let edges: Vec<_> = (1..points.len()).map(|k| (k - 1, k)).collect();
        Self::new(dim, points, etas, edges)
    }

    /// Copy of this boundary with every normal rescaled to length `r`.
    pub fn with_radius(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(RegulusError::domain("with_radius", r, "(0, inf)"));
        }
        let mut out = self.clone();
        let k = r / self.r;
        for s in &mut out.samples {
            s.eta *= k;
        }
        out.r = r;
        Ok(out)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[BoundarySample] {
        &self.samples
    }

    pub fn point(&self, i: usize) -> Vec3 {
        self.samples[i].point
    }

    pub fn eta(&self, i: usize) -> Vec3 {
        self.samples[i].eta
    }

    /// Unit normal at sample `i`.
    pub fn normal(&self, i: usize) -> Vec3 {
        self.samples[i].eta / self.r
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    /// Undirected edges `(i, j)` with `i < j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Largest gap between neighbouring samples.
    pub fn resolution_h(&self) -> f64 {
        self.resolution_h
    }

    pub fn component(&self, i: usize) -> usize {
        self.component[i]
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(RegulusError::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = self.samples[0].point;
        let mut hi = lo;
        for s in &self.samples {
            lo = lo.inf(&s.point);
            hi = hi.sup(&s.point);
        }
        (lo, hi)
    }

    /// Neighbouring pairs whose normals point in opposing directions. An
    /// oriented boundary has none.
    pub fn orientation_flips(&self) -> Vec<(usize, usize)> {
        self.edges()
            .filter(|&(i, j)| self.eta(i).dot(&self.eta(j)) < 0.0)
            .collect()
    }

    /// Boundary with one extra sample at the midpoint of every edge. Original
    /// samples keep their indices; midpoints are appended in edge order.
    pub fn densified(&self) -> Result<Self> {
        let n = self.len();
        let mut points: Vec<Vec3> = self.samples.iter().map(|s| s.point).collect();
        let mut etas: Vec<Vec3> = self.samples.iter().map(|s| s.eta).collect();
        let mut edges = Vec::new();
        for (k, (i, j)) in self.edges().enumerate() {
            let m = n + k;
            points.push((self.point(i) + self.point(j)) * 0.5);
            let sum = self.eta(i) + self.eta(j);
            let eta = if sum.norm() > 0.0 {
                sum * (self.r / sum.norm())
            } else {
                self.eta(i)
            };
            etas.push(eta);
            edges.push((i, m));
            edges.push((m, j));
        }
        Self::new(self.dim, points, etas, edges)
    }

    /// Point at parameter `u` in `[0, 1]` on the cubic Hermite arc from
    /// sample `a` to sample `b`, with end tangents orthogonal to the normals.
    ///
    /// The tangent magnitudes use the circular-arc length estimate
    /// `L theta / (2 sin(theta/2))`, so arcs of constant curvature are
    /// reproduced to fourth order in the edge length.
    pub fn edge_point(&self, a: usize, b: usize, u: f64) -> Vec3 {
        let h = self.hermite(a, b);
        h.point(u)
    }

    /// Point and scaled normal at parameter `u` on the Hermite arc `a -> b`.
    pub fn edge_frame(&self, a: usize, b: usize, u: f64) -> (Vec3, Vec3) {
        let h = self.hermite(a, b);
        let p = h.point(u);
        let tangent = h.derivative(u);
        let mut m = self.normal(a) * (1.0 - u) + self.normal(b) * u;
        let tn = tangent.norm();
        if tn > 0.0 {
            let t = tangent / tn;
            m -= t * m.dot(&t);
        }
        let mn = m.norm();
        let eta = if mn > 0.0 {
            m * (self.r / mn)
        } else if u < 0.5 {
            self.eta(a)
        } else {
            self.eta(b)
        };
        (p, eta)
    }

    fn hermite(&self, a: usize, b: usize) -> Hermite {
        let pa = self.point(a);
        let pb = self.point(b);
        let d = pb - pa;
        let len = d.norm();
        let na = self.normal(a);
        let nb = self.normal(b);
        let cos = na.dot(&nb).clamp(-1.0, 1.0);
        let theta = cos.acos();
        let arc = if theta < 1e-8 {
            len
        } else {
            len * theta / (2.0 * (theta / 2.0).sin())
        };
        let tangent_at = |n: Vec3| {
            let t = d - n * d.dot(&n);
            let tn = t.norm();
            if tn > 0.0 {
                t * (arc / tn)
            } else {
                d
            }
        };
        Hermite {
            p0: pa,
            p1: pb,
            m0: tangent_at(na),
            m1: tangent_at(nb),
        }
    }

    pub fn summary(&self) -> BoundarySummary {
        BoundarySummary {
            samples: self.len(),
            dim: self.dim,
            r: self.r,
            resolution_h: self.resolution_h,
            components: self.n_components,
        }
    }
}

struct Hermite {
    p0: Vec3,
    p1: Vec3,
    m0: Vec3,
    m1: Vec3,
}

impl Hermite {
    fn point(&self, u: f64) -> Vec3 {
        let u2 = u * u;
        let u3 = u2 * u;
        self.p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + self.m0 * (u3 - 2.0 * u2 + u)
            + self.p1 * (3.0 * u2 - 2.0 * u3)
            + self.m1 * (u3 - u2)
    }

    fn derivative(&self, u: f64) -> Vec3 {
        let u2 = u * u;
        self.p0 * (6.0 * u2 - 6.0 * u)
            + self.m0 * (3.0 * u2 - 4.0 * u + 1.0)
            + self.p1 * (6.0 * u - 6.0 * u2)
            + self.m1 * (3.0 * u2 - 2.0 * u)
    }
}

fn components(adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adjacency.len();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}
