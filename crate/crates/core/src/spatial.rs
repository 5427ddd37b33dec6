//! Uniform hash grid for exact radius queries over a fixed point set.

use std::collections::HashMap;

use crate::boundary::Vec3;

type Cell = (i64, i64, i64);

#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    cells: HashMap<Cell, Vec<usize>>,
    points: Vec<Vec3>,
}

impl SpatialGrid {
    /// Builds a grid with the given cell size. Indices inside each cell are
    /// stored in ascending order.
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            cells,
            points: points.to_vec(),
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Indices of all points with `|p - center| < radius`, ascending.
    pub fn within(&self, center: &Vec3, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        if !(radius > 0.0) {
            return;
        }
        let r2 = radius * radius;
        let span = |a: f64| ((a + radius) / self.cell).floor() - ((a - radius) / self.cell).floor() + 1.0;
        if span(center.x) * span(center.y) * span(center.z) > self.cells.len() as f64 {
            for (i, p) in self.points.iter().enumerate() {
                if (p - center).norm_squared() < r2 {
                    out.push(i);
                }
            }
            return;
        }
        let lo = key(&center.add_scalar(-radius), self.cell);
        let hi = key(&center.add_scalar(radius), self.cell);
        for x in lo.0..=hi.0 {
            for y in lo.1..=hi.1 {
                for z in lo.2..=hi.2 {
                    if let Some(list) = self.cells.get(&(x, y, z)) {
                        out.extend(
                            list.iter()
                                .copied()
                                .filter(|&i| (self.points[i] - center).norm_squared() < r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
    }

    /// Index of the point closest to `center` (lowest index on ties) and its
    /// distance.
    pub fn nearest(&self, center: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut radius = self.cell;
        let mut buf = Vec::new();
        loop {
            self.within(center, radius, &mut buf);
            // Everything outside the ball is at least `radius` away.
            if let Some(best) = argmin_distance(&self.points, center, &buf) {
                return Some(best);
            }
            radius *= 2.0;
        }
    }
}

fn argmin_distance(points: &[Vec3], center: &Vec3, idx: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &i in idx {
        let d = (points[i] - center).norm();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

fn key(p: &Vec3, cell: f64) -> Cell {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}
