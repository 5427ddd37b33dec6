//! Static SVG of a planar boundary with the refutation evidence on top.

use std::fmt::Write;

use regulus::certifier::Evidence;
use regulus::Boundary;

const SIZE: f64 = 800.0;

pub fn render(b: &Boundary, evidence: &[Evidence]) -> String {
    let (lo, hi) = b.bounding_box();
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let pad = 0.05 * span;
    let scale = SIZE / (span + 2.0 * pad);
    // SVG y grows downwards.
    let map = |i: usize| {
        let p = b.point(i);
        ((p.x - lo.x + pad) * scale, (hi.y - p.y + pad) * scale)
    };
    let width = (hi.x - lo.x + 2.0 * pad) * scale;
    let height = (hi.y - lo.y + 2.0 * pad) * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let mut path = String::new();
    for (i, j) in b.edges() {
        let (x0, y0) = map(i);
        let (x1, y1) = map(j);
        let _ = write!(path, "M{x0:.3} {y0:.3}L{x1:.3} {y1:.3}");
    }
    let _ = writeln!(out, r#"<path d="{path}" fill="none" stroke="black" stroke-width="1"/>"#);
    for ev in evidence {
        match *ev {
            Evidence::IntrinsicDistance { i, j, .. } | Evidence::Lipschitz { i, j, .. } => {
                let (x0, y0) = map(i);
                let (x1, y1) = map(j);
                let _ = writeln!(
                    out,
                    r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="red" stroke-width="2"/>"#
                );
            }
            Evidence::TangentBall { sample, intruder, .. } => {
                for k in [sample, intruder] {
                    let (x, y) = map(k);
                    let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="red"/>"#);
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
