//! Zero contours of planar implicit fields by marching squares.

use std::collections::HashMap;

use crate::boundary::{Boundary, Vec3};
use crate::error::{RegulusError, Result};
use crate::normal_field::{normals_from_implicit, ImplicitField, ImplicitOptions};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bounds {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Bounds {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(RegulusError::InvalidInput(format!(
                "bounds [{x0}, {x1}] x [{y0}, {y1}] are empty"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }
}

/// Grid edge holding a contour vertex: horizontal edges start at node
/// `(i, j)` and go to `(i+1, j)`, vertical ones go to `(i, j+1)`.
type EdgeKey = (bool, usize, usize);

/// Closed polylines of the zero set of `field` inside `bounds`, sampled on a
/// `grid_n x grid_n` cell grid with crossings refined by bisection, with
/// normals `r grad f / |grad f|`.
pub fn extract_level_set(field: &dyn ImplicitField, bounds: Bounds, grid_n: usize, r: f64) -> Result<Boundary> {
    if grid_n < 2 {
        return Err(RegulusError::InvalidInput(
            "grid needs at least 2 cells per axis".into(),
        ));
    }
    let n = grid_n;
    let dx = (bounds.x1 - bounds.x0) / n as f64;
    let dy = (bounds.y1 - bounds.y0) / n as f64;
    let node = |i: usize, j: usize| Vec3::new(bounds.x0 + i as f64 * dx, bounds.y0 + j as f64 * dy, 0.0);
    let vals: Vec<f64> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| (i, j)))
        .map(|(i, j)| field.value(&node(i, j)))
        .collect();
    let val = |i: usize, j: usize| vals[j * (n + 1) + i];
    let inside = |i: usize, j: usize| val(i, j) < 0.0;

    let tol = 1e-10 * dx.min(dy);
    let mut vertex_of: HashMap<EdgeKey, usize> = HashMap::new();
    let mut points: Vec<Vec3> = Vec::new();
    let mut links: Vec<Vec<usize>> = Vec::new();
    let mut vertex = |key: EdgeKey, points: &mut Vec<Vec3>, links: &mut Vec<Vec<usize>>| -> usize {
        *vertex_of.entry(key).or_insert_with(|| {
            let (horizontal, i, j) = key;
            let a = node(i, j);
            let b = if horizontal { node(i + 1, j) } else { node(i, j + 1) };
            points.push(refine_root(field, a, b, tol));
            links.push(Vec::new());
            points.len() - 1
        })
    };

    for j in 0..n {
        for i in 0..n {
            let c = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            // Edges: bottom, right, top, left.
            let keys: [EdgeKey; 4] = [(true, i, j), (false, i + 1, j), (true, i, j + 1), (false, i, j)];
            let crossed: Vec<usize> = (0..4)
                .filter(|&e| {
                    let (a, b) = [(0, 1), (1, 2), (3, 2), (0, 3)][e];
                    c[a] != c[b]
                })
                .collect();
            let pairs: Vec<(usize, usize)> = match crossed.len() {
                0 => continue,
                2 => vec![(crossed[0], crossed[1])],
                _ => {
                    let centre = field.value(&(node(i, j) + Vec3::new(0.5 * dx, 0.5 * dy, 0.0))) < 0.0;
                    if centre == c[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
            };
            for (ea, eb) in pairs {
                let va = vertex(keys[ea], &mut points, &mut links);
                let vb = vertex(keys[eb], &mut points, &mut links);
                links[va].push(vb);
                links[vb].push(va);
            }
        }
    }
    if points.is_empty() {
        return Err(RegulusError::NoContour);
    }

    let mut loops: Vec<Vec<Vec3>> = Vec::new();
    let mut used = vec![false; points.len()];
    for start in 0..points.len() {
        if used[start] {
            continue;
        }
        if links[start].len() != 2 {
            return Err(RegulusError::InvalidInput(
                "contour leaves the bounding box; enlarge the bounds".into(),
            ));
        }
        let mut chain = vec![start];
        used[start] = true;
        let (mut prev, mut cur) = (start, links[start][0]);
        while cur != start {
            if links[cur].len() != 2 {
                return Err(RegulusError::InvalidInput(
                    "contour leaves the bounding box; enlarge the bounds".into(),
                ));
            }
            used[cur] = true;
            chain.push(cur);
            let next = if links[cur][0] == prev {
                links[cur][1]
            } else {
                links[cur][0]
            };
            prev = cur;
            cur = next;
        }
        let mut pts: Vec<Vec3> = Vec::with_capacity(chain.len());
        for &k in &chain {
            // Crossings at a grid node appear once per incident edge.
            if pts.last().is_none_or(|q: &Vec3| (points[k] - q).norm() > tol) {
                pts.push(points[k]);
            }
        }
        while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= tol {
            pts.pop();
        }
        if pts.len() >= 3 {
            loops.push(pts);
        }
    }
    if loops.is_empty() {
        return Err(RegulusError::NoContour);
    }

    let opts = ImplicitOptions::default();
    let loops = loops
        .into_iter()
        .map(|pts| {
            let samples = normals_from_implicit(field, &pts, r, &opts)?;
            Ok(samples.into_iter().map(|s| (s.point, s.eta)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Boundary::from_loops(2, loops)
}

fn refine_root(field: &dyn ImplicitField, a: Vec3, b: Vec3, tol: f64) -> Vec3 {
    let fa = field.value(&a);
    let (mut lo, mut hi) = (a, b);
    let neg_lo = fa < 0.0;
    while (hi - lo).norm() > tol {
        let m = (lo + hi) * 0.5;
        if (field.value(&m) < 0.0) == neg_lo {
            lo = m;
        } else {
            hi = m;
        }
    }
    let (fl, fh) = (field.value(&lo), field.value(&hi));
    // Secant step inside the final bracket.
    if fh != fl {
        let u = (fl / (fl - fh)).clamp(0.0, 1.0);
        lo + (hi - lo) * u
    } else {
        (lo + hi) * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::expr::Expr;

    #[test]
    fn unit_circle_contour() {
        let f = Expr::parse("sqrt(x^2 + y^2) - 1").unwrap();
        let b = extract_level_set(&f, Bounds::new(-2.0, -2.0, 2.0, 2.0).unwrap(), 512, 1.0).unwrap();
        assert_eq!(b.n_components(), 1);
        for s in b.samples() {
            assert!((s.point.norm() - 1.0).abs() < 1e-5);
            assert!((s.eta - s.point / s.point.norm()).norm() < 1e-9);
        }
    }

    #[test]
    fn two_components_and_saddles() {
        let f = Expr::parse("min(sqrt((x-1.5)^2 + y^2), sqrt((x+1.5)^2 + y^2)) - 1").unwrap();
        let b = extract_level_set(&f, Bounds::new(-3.0, -2.0, 3.0, 2.0).unwrap(), 64, 0.5).unwrap();
        assert_eq!(b.n_components(), 2);
    }

    #[test]
    fn failures() {
        let pos = Expr::parse("x^2 + y^2 + 1").unwrap();
        let bx = Bounds::new(-1.0, -1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            extract_level_set(&pos, bx, 32, 1.0),
            Err(RegulusError::NoContour)
        ));
        let big = Expr::parse("sqrt(x^2 + y^2) - 5").unwrap();
        assert!(matches!(
            extract_level_set(&big, bx, 32, 1.0),
            Err(RegulusError::NoContour)
        ));
        let cut = Expr::parse("x").unwrap();
        assert!(extract_level_set(&cut, bx, 32, 1.0).is_err());
    }
}
