//! Intrinsic boundary distance, discrete geodesics and the chord-doubling
//! midpoint construction.
//!
//! The intrinsic distance is realized as a shortest path in a graph whose
//! edges join samples closer than a step cap (plus all declared adjacency
//! edges). Chords are shorter than the arcs they span, so graph distances
//! are lower bounds of the true intrinsic distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{Boundary, Vec3};
use crate::error::{RegulusError, Result};
use crate::geometry::{chord_doubling_limit, iterate_psi, phi_unchecked, psi_unchecked, Radius};
use crate::index::IndexedBoundary;
use crate::serde_util;
use crate::spatial::SpatialGrid;
use crate::tolerance::Tolerances;

/// Weighted neighbour graph over boundary samples.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<(usize, f64)>>,
    step_cap: f64,
    component: Vec<usize>,
    n_components: usize,
}

impl Graph {
    /// Joins every pair of samples closer than `step_cap`, and every declared
    /// adjacency pair, by an edge weighted with its Euclidean length.
    pub fn build(boundary: &Boundary, grid: &SpatialGrid, step_cap: f64) -> Result<Self> {
        if !(step_cap >= boundary.resolution_h()) || !step_cap.is_finite() {
            return Err(RegulusError::InvalidInput(format!(
                "step cap {step_cap} is below the sampling resolution {}",
                boundary.resolution_h()
            )));
        }
        let adj: Vec<Vec<(usize, f64)>> = (0..boundary.len())
            .into_par_iter()
            .map_init(Vec::new, |buf, i| {
                let p = boundary.point(i);
                grid.within(&p, step_cap, buf);
                let mut nb: Vec<usize> = buf.iter().copied().filter(|&j| j != i).collect();
                nb.extend_from_slice(boundary.neighbors(i));
                nb.sort_unstable();
                nb.dedup();
                nb.into_iter().map(|j| (j, (boundary.point(j) - p).norm())).collect()
            })
            .collect();
        let (component, n_components) = label_components(&adj);
        Ok(Self {
            adj,
            step_cap,
            component,
            n_components,
        })
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn step_cap(&self) -> f64 {
        self.step_cap
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn component(&self, i: usize) -> usize {
        self.component[i]
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }
}

fn label_components(adj: &[Vec<(usize, f64)>]) -> (Vec<usize>, usize) {
    let mut comp = vec![usize::MAX; adj.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..adj.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
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

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap; ties settle the lower index first.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable single-source shortest-path state. Only touched entries are
/// reset between runs, so bounded searches cost proportional to the region
/// they explore.
#[derive(Debug, Clone)]
pub struct Dijkstra {
    dist: Vec<f64>,
    pred: Vec<usize>,
    touched: Vec<usize>,
    settled: Vec<usize>,
    heap: BinaryHeap<Entry>,
}

impl Dijkstra {
    pub fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            pred: vec![usize::MAX; n],
            touched: Vec::new(),
            settled: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Explores from `src` up to distance `cutoff` (inclusive), stopping
    /// early once `target` is settled. Equal-length paths prefer the lower
    /// predecessor index.
    pub fn run(&mut self, g: &Graph, src: usize, cutoff: f64, target: Option<usize>) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.pred[v] = usize::MAX;
        }
        self.touched.clear();
        self.settled.clear();
        self.heap.clear();

        self.dist[src] = 0.0;
        self.touched.push(src);
        self.heap.push(Entry { dist: 0.0, vertex: src });
        while let Some(Entry { dist, vertex }) = self.heap.pop() {
            if dist > self.dist[vertex] {
                continue;
            }
            self.settled.push(vertex);
            if target == Some(vertex) {
                break;
            }
            for &(w, len) in g.neighbors(vertex) {
                let nd = dist + len;
                if nd > cutoff {
                    continue;
                }
                let cur = self.dist[w];
                if nd < cur || (nd == cur && vertex < self.pred[w]) {
                    if cur == f64::INFINITY {
                        self.touched.push(w);
                    }
                    self.dist[w] = nd;
                    self.pred[w] = vertex;
                    if nd < cur {
                        self.heap.push(Entry { dist: nd, vertex: w });
                    }
                }
            }
        }
    }

    /// Distance to `v` from the last source, `inf` when not reached.
    pub fn dist(&self, v: usize) -> f64 {
        self.dist[v]
    }

    /// Vertices in the order they were settled.
    pub fn settled(&self) -> &[usize] {
        &self.settled
    }

    /// Vertex sequence from the last source to `v`, if reached.
    pub fn path_to(&self, v: usize) -> Option<Vec<usize>> {
        if !self.dist[v].is_finite() {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while self.pred[cur] != usize::MAX {
            cur = self.pred[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Euclidean and intrinsic distance between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub euclidean: f64,
    /// Graph shortest-path length; `inf` (serialized as `null`) when the
    /// samples lie in different components.
    #[serde(serialize_with = "serde_util::finite")]
    pub intrinsic: f64,
    #[serde(serialize_with = "serde_util::finite")]
    pub ratio: f64,
    pub reachable: bool,
    /// Documented size of the underestimate, `step_cap * intrinsic / r`.
    #[serde(serialize_with = "serde_util::finite")]
    pub error_budget: f64,
}

impl PairDistance {
    pub(crate) fn new(b: &Boundary, step_cap: f64, i: usize, j: usize, intrinsic: f64) -> Self {
        let euclidean = (b.point(i) - b.point(j)).norm();
        Self {
            i,
            j,
            euclidean,
            intrinsic,
            ratio: if euclidean > 0.0 { intrinsic / euclidean } else { 1.0 },
            reachable: intrinsic.is_finite(),
            error_budget: step_cap * intrinsic / b.r(),
        }
    }
}

/// Graph distance between samples `i` and `j`.
pub fn intrinsic_distance(ix: &IndexedBoundary, i: usize, j: usize) -> Result<PairDistance> {
    ix.check_index(i)?;
    ix.check_index(j)?;
    if i == j {
        return Err(RegulusError::InvalidInput(
            "intrinsic distance needs two distinct samples".into(),
        ));
    }
    let g = ix.graph();
    let d = if g.component(i) != g.component(j) {
        f64::INFINITY
    } else {
        let mut dj = Dijkstra::new(ix.len());
        dj.run(g, i, f64::INFINITY, Some(j));
        dj.dist(j)
    };
    Ok(PairDistance::new(ix, g.step_cap(), i, j, d))
}

/// Position of a path vertex: parameter `u` on the Hermite arc from sample
/// `a` to sample `b` (`u = 0` is the sample `a` itself).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Loc {
    a: usize,
    b: usize,
    u: f64,
}

impl Loc {
    fn at(a: usize) -> Self {
        Loc { a, b: a, u: 0.0 }
    }

    fn pos(&self, bd: &Boundary) -> Vec3 {
        if self.u == 0.0 || self.a == self.b {
            bd.point(self.a)
        } else {
            bd.edge_point(self.a, self.b, self.u)
        }
    }

    fn anchor(&self) -> usize {
        if self.u <= 0.5 {
            self.a
        } else {
            self.b
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicOptions {
    pub max_iterations: usize,
    /// Stop once a sweep shortens the path by less than this fraction.
    pub rel_decrease: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_decrease: 1e-10,
        }
    }
}

/// Polygonal curve on the boundary with its arclength parametrization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicPath {
    #[serde(serialize_with = "serde_util::points")]
    pub vertices: Vec<Vec3>,
    /// Arclength parameter of each vertex.
    pub times: Vec<f64>,
    pub length: f64,
    /// Segment speeds `|v_{k+1} - v_k| / (t_{k+1} - t_k)`; constant for an
    /// arclength parametrization.
    pub speed_profile: Vec<f64>,
    /// Discrete Lipschitz constant of the unit tangent.
    pub max_turn_rate: f64,
    /// Length of the graph path the curve started from.
    #[serde(serialize_with = "serde_util::finite")]
    pub graph_length: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GeodesicPath {
    fn from_vertices(vertices: Vec<Vec3>, graph_length: f64, iterations: usize, converged: bool) -> Self {
        let mut times = Vec::with_capacity(vertices.len());
        let mut t = 0.0;
        times.push(0.0);
        for w in vertices.windows(2) {
            t += (w[1] - w[0]).norm();
            times.push(t);
        }
        let speed_profile = vertices
            .windows(2)
            .zip(times.windows(2))
            .map(|(v, t)| {
                let dt = t[1] - t[0];
                if dt > 0.0 {
                    (v[1] - v[0]).norm() / dt
                } else {
                    1.0
                }
            })
            .collect();
        let max_turn_rate = turn_rate(&vertices);
        Self {
            vertices,
            times,
            length: t,
            speed_profile,
            max_turn_rate,
            graph_length,
            iterations,
            converged,
        }
    }

    /// Unit-speed polygon through the given points.
    pub fn polygon(vertices: Vec<Vec3>) -> Self {
        let len = vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        Self::from_vertices(vertices, len, 0, true)
    }
}

/// `max |T_k - T_{k-1}| / ((l_{k-1} + l_k) / 2)` over interior vertices, with
/// `T` the unit direction and `l` the length of each segment.
pub fn turn_rate(vertices: &[Vec3]) -> f64 {
    let segs: Vec<(Vec3, f64)> = vertices
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let l = d.norm();
            (if l > 0.0 { d / l } else { d }, l)
        })
        .filter(|(_, l)| *l > 0.0)
        .collect();
    segs.windows(2)
        .map(|w| (w[1].0 - w[0].0).norm() / (0.5 * (w[0].1 + w[1].1)))
        .fold(0.0, f64::max)
}

/// Shortest graph path from `i` to `j`, locally shortened by sliding
/// interior vertices along the boundary and dropping vertices whose
/// neighbours are within one step cap of each other.
pub fn geodesic(ix: &IndexedBoundary, i: usize, j: usize, opts: &GeodesicOptions) -> Result<GeodesicPath> {
    ix.check_index(i)?;
    ix.check_index(j)?;
    let g = ix.graph();
    if g.component(i) != g.component(j) {
        return Err(RegulusError::InvalidInput(format!(
            "samples {i} and {j} lie in different boundary components"
        )));
    }
    if i == j {
        return Ok(GeodesicPath::from_vertices(vec![ix.point(i)], 0.0, 0, true));
    }
    let mut dj = Dijkstra::new(ix.len());
    dj.run(g, i, f64::INFINITY, Some(j));
    let graph_length = dj.dist(j);
    let nodes = dj.path_to(j).expect("same component");
    let mut path: Vec<Loc> = nodes.into_iter().map(Loc::at).collect();
    let (iterations, converged) = shorten(ix, &mut path, opts);
    let vertices = path.iter().map(|l| l.pos(ix)).collect();
    Ok(GeodesicPath::from_vertices(
        vertices,
        graph_length,
        iterations,
        converged,
    ))
}

fn path_length(bd: &Boundary, path: &[Loc]) -> f64 {
    path.windows(2).map(|w| (w[1].pos(bd) - w[0].pos(bd)).norm()).sum()
}

fn shorten(ix: &IndexedBoundary, path: &mut Vec<Loc>, opts: &GeodesicOptions) -> (usize, bool) {
    let bd = ix.boundary();
    let cap = ix.graph().step_cap();
    let mut len = path_length(bd, path);
    for iter in 1..=opts.max_iterations {
        let mut k = 1;
        while k + 1 < path.len() {
            let p = path[k - 1].pos(bd);
            let q = path[k + 1].pos(bd);
            if (q - p).norm() < cap {
                path.remove(k);
                continue;
            }
            let cost = |z: Vec3| {
                let (a, b) = ((z - p).norm(), (q - z).norm());
                a + b + 10.0 * ((a - cap).max(0.0) + (b - cap).max(0.0))
            };
            let mut best_loc = path[k];
            let mut best = cost(best_loc.pos(bd));
            let anchor = path[k].anchor();
            for &nb in bd.neighbors(anchor) {
                let f = |u: f64| cost(bd.edge_point(anchor, nb, u));
                let u = golden_min(f, 0.0, 1.0, 48);
                let val = f(u);
                if val < best {
                    best = val;
                    best_loc = Loc { a: anchor, b: nb, u };
                }
            }
            path[k] = best_loc;
            k += 1;
        }
        let new_len = path_length(bd, path);
        let decrease = len - new_len;
        len = new_len;
        if decrease <= opts.rel_decrease * len {
            return (iter, true);
        }
    }
    (opts.max_iterations, false)
}

pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // The interval endpoints are candidates too: the minimum of a
    // constrained slide often sits at a sample.
    [0.0, mid, 1.0]
        .into_iter()
        .map(|u| (f(u), u))
        .fold((f64::INFINITY, mid), |acc, c| if c.0 < acc.0 { c } else { acc })
        .1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeoLipCertificate {
    pub ok: bool,
    pub max_turn_rate: f64,
    pub bound: f64,
}

/// The turn rate of a geodesic of a boundary regular at radius `r` is at most
/// `1/r`; the sampled check allows `(1 + eps_geo) / r`.
pub fn geo_lip_certificate(path: &GeodesicPath, r: Radius, eps_geo: f64) -> GeoLipCertificate {
    let bound = (1.0 + eps_geo) / r.get();
    GeoLipCertificate {
        ok: path.max_turn_rate <= bound,
        max_turn_rate: path.max_turn_rate,
        bound,
    }
}

/// Result of recursive chord doubling between two samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordDoubling {
    pub path: GeodesicPath,
    pub depth: usize,
    pub chord: f64,
    /// Polygon length after each level, starting with the chord.
    pub level_lengths: Vec<f64>,
    /// `2^depth psi^depth(chord)`.
    pub psi_bound: f64,
    /// `2 r atan(chord / sqrt(4 r^2 - chord^2))`.
    pub arctan_limit: f64,
    pub within_bound: bool,
}

/// Splits the chord `x_i x_j` recursively at boundary points on the bisecting
/// hyperplane of each segment.
///
/// Every split must satisfy the sagitta bound `|z - mid| <= phi(s)` and the
/// half-chord bound `|z - x|, |z - y| <= psi(s)` up to `eps_len`; otherwise
/// the boundary is not regular at `r` (or is under-sampled there) and a
/// [`RegulusError::NoMidpoint`] names the offending segment.
pub fn chord_double(
    ix: &IndexedBoundary,
    i: usize,
    j: usize,
    depth: usize,
    r: Radius,
    tol: &Tolerances,
) -> Result<ChordDoubling> {
    ix.check_index(i)?;
    ix.check_index(j)?;
    let rv = r.get();
    let x = ix.point(i);
    let y = ix.point(j);
    let chord = (y - x).norm();
    if !(chord < 2.0 * rv) {
        return Err(RegulusError::domain(
            "chord_double",
            chord,
            format!("[0, {})", 2.0 * rv),
        ));
    }
    let eps_len = tol.eps_len(ix.resolution_h(), rv);
    let mut pts = vec![x, y];
    let mut level_lengths = vec![chord];
    for level in 1..=depth {
        let mut next = Vec::with_capacity(2 * pts.len() - 1);
        next.push(pts[0]);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let s = (b - a).norm();
            if s == 0.0 {
                next.push(b);
                continue;
            }
            let mid = (a + b) * 0.5;
            let z = bisector_point(ix, a, b).ok_or_else(|| RegulusError::NoMidpoint {
                chord: s,
                depth: level,
                reason: "the bisecting hyperplane meets no boundary point within half a chord of the midpoint".into(),
            })?;
            let sag = (z - mid).norm();
            let (phi, psi) = (phi_unchecked(s, rv), psi_unchecked(s, rv));
            if sag > phi + eps_len {
                return Err(RegulusError::NoMidpoint {
                    chord: s,
                    depth: level,
                    reason: format!("nearest bisector point is {sag} from the midpoint, sagitta bound {phi}"),
                });
            }
            let side = (z - a).norm().max((z - b).norm());
            if side > psi + eps_len {
                return Err(RegulusError::NoMidpoint {
                    chord: s,
                    depth: level,
                    reason: format!("half-chord {side} exceeds {psi}"),
                });
            }
            next.push(z);
            next.push(b);
        }
        pts = next;
        level_lengths.push(pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum());
    }
    let path = GeodesicPath::polygon(pts);
    let psi_bound = iterate_psi(chord, r, depth as u32)?;
    let arctan_limit = chord_doubling_limit(chord, r)?;
    let within_bound = path.length <= psi_bound + depth as f64 * eps_len;
    Ok(ChordDoubling {
        path,
        depth,
        chord,
        level_lengths,
        psi_bound,
        arctan_limit,
        within_bound,
    })
}

/// Boundary point on the hyperplane bisecting `x y` that is closest to the
/// midpoint, among points within `|x - y| / 2` of it. Crossings are located
/// on the Hermite arcs of the adjacency edges.
fn bisector_point(ix: &IndexedBoundary, x: Vec3, y: Vec3) -> Option<Vec3> {
    let bd = ix.boundary();
    let s = (y - x).norm();
    let mid = (x + y) * 0.5;
    let u = (y - x) / s;
    let half = 0.5 * s;
    let side = |p: Vec3| (p - mid).dot(&u);
    let mut cand = Vec::new();
    ix.grid().within(&mid, half + bd.resolution_h(), &mut cand);

    let mut best: Option<(f64, Vec3)> = None;
    let mut consider = |z: Vec3| {
        let d = (z - mid).norm();
        if d <= half * (1.0 + 1e-12) && best.is_none_or(|(bd_, _)| d < bd_) {
            best = Some((d, z));
        }
    };
    for &a in &cand {
        let pa = bd.point(a);
        let ga = side(pa);
        if ga == 0.0 {
            consider(pa);
        }
        for &b in bd.neighbors(a) {
            if b < a && cand.binary_search(&b).is_ok() {
                continue;
            }
            let gb = side(bd.point(b));
            if ga * gb >= 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if (side(bd.edge_point(a, b, m)) < 0.0) == (ga < 0.0) {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            consider(bd.edge_point(a, b, 0.5 * (lo + hi)));
        }
    }
    best.map(|(_, z)| z)
}

/// Outcome of comparing intrinsic distances with the arc-length bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArctanBoundReport {
    pub pairs_checked: usize,
    /// Pairs skipped because they are at least `2r` apart.
    pub pairs_skipped: usize,
    /// `min (2 r atan(e / sqrt(4r^2 - e^2)) - d)` over checked pairs.
    #[serde(serialize_with = "serde_util::finite")]
    pub worst_slack: f64,
    pub worst_pair: Option<PairDistance>,
    #[serde(serialize_with = "serde_util::finite")]
    pub max_intrinsic: f64,
    pub below_pi_r: bool,
    pub tolerance: f64,
    pub ok: bool,
}

/// Checks `d(x, y) <= 2 r atan(|x-y| / sqrt(4r^2 - |x-y|^2)) < pi r` on the
/// given pairs, each up to `eps_len`.
pub fn arctan_bound_check(
    ix: &IndexedBoundary,
    r: Radius,
    pairs: &[(usize, usize)],
    tol: &Tolerances,
) -> Result<ArctanBoundReport> {
    let rv = r.get();
    for &(i, j) in pairs {
        ix.check_index(i)?;
        ix.check_index(j)?;
    }
    let g = ix.graph();
    let cutoff = 2.0 * std::f64::consts::PI * rv;
    let results: Vec<Option<(f64, PairDistance)>> = pairs
        .par_iter()
        .map_init(
            || Dijkstra::new(ix.len()),
            |dj, &(i, j)| {
                let e = (ix.point(i) - ix.point(j)).norm();
                if !(e < 2.0 * rv) {
                    return None;
                }
                let d = if i == j {
                    0.0
                } else {
                    dj.run(g, i, cutoff, Some(j));
                    dj.dist(j)
                };
                let pd = PairDistance::new(ix, g.step_cap(), i, j, d);
                let limit = chord_doubling_limit(e, r).expect("checked chord");
                Some((limit - d, pd))
            },
        )
        .collect();
    let eps = tol.eps_len(ix.resolution_h(), rv);
    let mut worst: Option<(f64, PairDistance)> = None;
    let mut max_d: f64 = 0.0;
    let mut checked = 0;
    for (slack, pd) in results.into_iter().flatten() {
        checked += 1;
        max_d = max_d.max(pd.intrinsic);
        if worst.is_none_or(|(w, _)| slack < w) {
            worst = Some((slack, pd));
        }
    }
    let worst_slack = worst.map_or(f64::INFINITY, |w| w.0);
    let below = max_d < std::f64::consts::PI * rv + eps;
    Ok(ArctanBoundReport {
        pairs_checked: checked,
        pairs_skipped: pairs.len() - checked,
        worst_slack,
        worst_pair: worst.map(|w| w.1),
        max_intrinsic: max_d,
        below_pi_r: below,
        tolerance: eps,
        ok: worst_slack >= -eps && below,
    })
}

/// `count` random sample pairs with Euclidean distance below `max_euclidean`
/// (rejection sampling; gives up after `1000 * count` draws).
pub fn sample_pairs(bd: &Boundary, max_euclidean: f64, count: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let n = bd.len();
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count && draws < 1000 * count.max(1) {
        draws += 1;
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j && (bd.point(i) - bd.point(j)).norm() < max_euclidean {
            out.push((i, j));
        }
    }
    out
}

/// A pair ranked by intrinsic/Euclidean ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankedPair {
    #[serde(flatten)]
    pub pair: PairDistance,
    /// `d >= (pi/2) e`.
    pub flagged: bool,
}

/// The `top` pairs with the largest intrinsic/Euclidean ratio among pairs
/// closer than `2r`, ordered by decreasing ratio (ties by `(i, j)`).
pub fn analyze_pairs(ix: &IndexedBoundary, r: Radius, top: usize) -> Vec<RankedPair> {
    let rv = r.get();
    let g = ix.graph();
    let n = ix.len();
    let per_source: Vec<Vec<RankedPair>> = (0..n)
        .into_par_iter()
        .map_init(
            || (Dijkstra::new(n), Vec::new()),
            |(dj, buf), i| {
                ix.grid().within(&ix.point(i), 2.0 * rv, buf);
                let partners: Vec<usize> = buf.iter().copied().filter(|&j| j > i).collect();
                if partners.is_empty() {
                    return Vec::new();
                }
                dj.run(g, i, f64::INFINITY, None);
                let mut best: Vec<RankedPair> = partners
                    .into_iter()
                    .map(|j| {
                        let pair = PairDistance::new(ix, g.step_cap(), i, j, dj.dist(j));
                        RankedPair {
                            flagged: pair.intrinsic >= std::f64::consts::FRAC_PI_2 * pair.euclidean,
                            pair,
                        }
                    })
                    .collect();
                best.sort_by(rank_order);
                best.truncate(top);
                best
            },
        )
        .collect();
    let mut all: Vec<RankedPair> = per_source.into_iter().flatten().collect();
    all.sort_by(rank_order);
    all.truncate(top);
    all
}

fn rank_order(a: &RankedPair, b: &RankedPair) -> Ordering {
    b.pair
        .ratio
        .total_cmp(&a.pair.ratio)
        .then(a.pair.i.cmp(&b.pair.i))
        .then(a.pair.j.cmp(&b.pair.j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(n: usize, radius: f64) -> IndexedBoundary {
        let lp = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let p = Vec3::new(t.cos(), t.sin(), 0.0) * radius;
                (p, p / radius)
            })
            .collect();
        IndexedBoundary::new(Boundary::from_loops(2, vec![lp]).unwrap()).unwrap()
    }

    #[test]
    fn antipodal_distance_on_circle() {
        let ix = circle(2000, 1.0);
        let pd = intrinsic_distance(&ix, 0, 1000).unwrap();
        assert!((pd.intrinsic - PI).abs() < 1e-3);
        assert!((pd.euclidean - 2.0).abs() < 1e-12);
        let adj = intrinsic_distance(&ix, 0, 1).unwrap();
        assert_eq!(adj.intrinsic, adj.euclidean);
    }

    #[test]
    fn disjoint_components_are_unreachable() {
        let mk = |cx: f64| {
            (0..100)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / 100.0;
                    let n = Vec3::new(t.cos(), t.sin(), 0.0);
                    (n + Vec3::new(cx, 0.0, 0.0), n)
                })
                .collect()
        };
        let b = Boundary::from_loops(2, vec![mk(0.0), mk(5.0)]).unwrap();
        let ix = IndexedBoundary::new(b).unwrap();
        assert_eq!(ix.graph().n_components(), 2);
        let pd = intrinsic_distance(&ix, 0, 150).unwrap();
        assert!(!pd.reachable);
        assert!(pd.intrinsic.is_infinite());
    }

    #[test]
    fn geodesic_on_circle_is_an_arc() {
        let ix = circle(2000, 1.0);
        let path = geodesic(&ix, 0, 1000, &GeodesicOptions::default()).unwrap();
        assert!((path.length - PI).abs() < 1e-3);
        assert!(path.length <= path.graph_length + 1e-12);
        assert!((path.max_turn_rate - 1.0).abs() < 0.02, "{}", path.max_turn_rate);
        assert!(path.speed_profile.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let r1 = Radius::new(1.0).unwrap();
        assert!(geo_lip_certificate(&path, r1, 2.0 * ix.resolution_h()).ok);

        let single = geodesic(&ix, 5, 6, &GeodesicOptions::default()).unwrap();
        assert_eq!(single.vertices.len(), 2);
        assert_eq!(single.max_turn_rate, 0.0);
    }

    #[test]
    fn small_circle_fails_unit_certificate() {
        let ix = circle(1000, 0.5);
        let path = geodesic(&ix, 0, 400, &GeodesicOptions::default()).unwrap();
        let cert = geo_lip_certificate(&path, Radius::new(1.0).unwrap(), 0.01);
        assert!(!cert.ok);
        assert!((cert.max_turn_rate - 2.0).abs() < 0.05);
    }

    #[test]
    fn chord_doubling_converges_to_the_arc() {
        let ix = circle(2000, 1.0);
        // Samples 0 and 2000/6 span a 60 degree arc, chord 1.
        let j = 2000 / 6;
        let r = Radius::new(1.0).unwrap();
        let tol = Tolerances::default();
        let cd = chord_double(&ix, 0, j, 10, r, &tol).unwrap();
        let arc = 2.0 * PI * j as f64 / 2000.0;
        assert!((cd.path.length - arc).abs() < 1e-3);
        assert!(cd.within_bound);
        assert!(cd.level_lengths.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let flat = chord_double(&ix, 0, j, 0, r, &tol).unwrap();
        assert_eq!(flat.path.length, flat.chord);
    }

    #[test]
    fn arctan_bound_is_tight_on_circle() {
        let ix = circle(2000, 1.0);
        let r = Radius::new(1.0).unwrap();
        let pairs = [(0, 500), (0, 999), (10, 11), (3, 700)];
        let rep = arctan_bound_check(&ix, r, &pairs, &Tolerances::default()).unwrap();
        assert_eq!(rep.pairs_checked, 4);
        assert!(rep.ok);
        assert!(rep.worst_slack.abs() < 1e-4);
    }

    #[test]
    fn circle_top_ratio_is_below_half_pi() {
        let ix = circle(400, 1.0);
        let top = analyze_pairs(&ix, Radius::new(1.0).unwrap(), 5);
        assert_eq!(top.len(), 5);
        assert!(top.iter().all(|p| !p.flagged));
        assert!(top[0].pair.ratio > 1.5 && top[0].pair.ratio < PI / 2.0);
    }
}
