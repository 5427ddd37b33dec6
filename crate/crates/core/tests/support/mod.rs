#![allow(dead_code)]

use regulus::shapes::{generate, ShapeKind, ShapeSpec};
use regulus::{Boundary, IndexedBoundary};

pub fn builtins() -> Vec<ShapeKind> {
    vec![
        ShapeKind::Circle { radius: 1.0 },
        ShapeKind::Ellipse { a: 2.0, b: 1.0 },
        ShapeKind::Annulus { r_in: 1.0, r_out: 3.0 },
        ShapeKind::RoundedRectangle {
            width: 4.0,
            height: 3.0,
            fillet: 1.0,
        },
        ShapeKind::Dumbbell {
            disk_r: 2.0,
            center_gap: 10.0,
            neck_gap: 0.2,
            fillet: 0.5,
        },
    ]
}

pub fn sampled(kind: ShapeKind, n: Option<usize>, r: f64) -> Boundary {
    let mut spec = ShapeSpec::new(kind).with_r(r);
    spec.n = n;
    generate(&spec).unwrap().boundary
}

pub fn indexed(kind: ShapeKind, n: Option<usize>, r: f64) -> IndexedBoundary {
    IndexedBoundary::new(sampled(kind, n, r)).unwrap()
}

/// Every coordinate and normal multiplied by `lambda`.
pub fn scaled(b: &Boundary, lambda: f64) -> Boundary {
    let pts = b.samples().iter().map(|s| s.point * lambda).collect();
    let etas = b.samples().iter().map(|s| s.eta * lambda).collect();
    Boundary::new(b.dim(), pts, etas, b.edges()).unwrap()
}
