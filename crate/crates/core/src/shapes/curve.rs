//! Closed planar curves with exact arclength parametrizations: loops of
//! segments and circular arcs, and the ellipse.

use std::f64::consts::{PI, TAU};

use crate::boundary::Vec3;
use crate::error::{RegulusError, Result};

fn planar(x: f64, y: f64) -> Vec3 {
    Vec3::new(x, y, 0.0)
}

/// Outward normal for a curve traversed with the region on its left.
fn right_of(t: Vec3) -> Vec3 {
    planar(t.y, -t.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment {
        a: Vec3,
        b: Vec3,
    },
    /// Counterclockwise for positive `sweep`.
    Arc {
        center: Vec3,
        radius: f64,
        theta0: f64,
        sweep: f64,
    },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => (b - a).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point and unit tangent at arclength `s` from the start.
    pub fn at(&self, s: f64) -> (Vec3, Vec3) {
        match *self {
            Piece::Segment { a, b } => {
                let t = (b - a) / (b - a).norm();
                (a + t * s, t)
            }
            Piece::Arc {
                center,
                radius,
                theta0,
                sweep,
            } => {
                let sign = sweep.signum();
                let th = theta0 + sign * s / radius;
                let (sn, cs) = th.sin_cos();
                (center + planar(cs, sn) * radius, planar(-sn, cs) * sign)
            }
        }
    }

    /// Arclength of the point of this piece closest to `p`, and the distance.
    pub fn nearest(&self, p: &Vec3) -> (f64, f64) {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                let len = d.norm();
                let s = ((p - a).dot(&d) / len).clamp(0.0, len);
                (s, (a + d * (s / len) - p).norm())
            }
            Piece::Arc {
                center,
                radius,
                theta0,
                sweep,
            } => {
                let q = p - center;
                let len = radius * sweep.abs();
                let cand = if q.norm() > 0.0 {
                    let phi = q.y.atan2(q.x);
                    let u = ((phi - theta0) * sweep.signum()).rem_euclid(TAU);
                    if u <= sweep.abs() {
                        Some(u * radius)
                    } else {
                        None
                    }
                } else {
                    None
                };
                [cand, Some(0.0), Some(len)]
                    .into_iter()
                    .flatten()
                    .map(|s| (s, (self.at(s).0 - p).norm()))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .expect("non-empty")
            }
        }
    }
}

/// Closed arclength-parametrized planar curve, traversed with the enclosed
/// region on its left.
pub trait ClosedCurve: Send + Sync {
    fn length(&self) -> f64;
    /// Point and outward unit normal at arclength `s`.
    fn at(&self, s: f64) -> (Vec3, Vec3);
    /// Arclength of the closest point to `p`, and the distance.
    fn locate(&self, p: &Vec3) -> (f64, f64);

    /// `n` samples equally spaced in arclength, starting at `s = 0`.
    fn sample(&self, n: usize) -> Vec<(Vec3, Vec3)> {
        let l = self.length();
        (0..n).map(|k| self.at(l * k as f64 / n as f64)).collect()
    }
}

/// Loop of segments and arcs joined with continuous tangents.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLoop {
    pieces: Vec<Piece>,
    starts: Vec<f64>,
    length: f64,
}

impl PiecewiseLoop {
    /// Drops zero-length pieces and checks that consecutive pieces meet
    /// with matching tangents.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let pieces: Vec<Piece> = pieces.into_iter().filter(|p| p.length() > 1e-14).collect();
        if pieces.is_empty() {
            return Err(RegulusError::InconsistentShape("loop has no pieces".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            let q = &pieces[(k + 1) % pieces.len()];
            let (end, t_end) = p.at(p.length());
            let (start, t_start) = q.at(0.0);
            let scale = 1.0 + end.norm();
            if (end - start).norm() > 1e-9 * scale || (t_end - t_start).norm() > 1e-9 {
                return Err(RegulusError::InconsistentShape(format!(
                    "pieces {k} and {} do not join smoothly",
                    (k + 1) % pieces.len()
                )));
            }
        }
        let mut starts = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            starts.push(acc);
            acc += p.length();
        }
        Ok(Self {
            pieces,
            starts,
            length: acc,
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }
}

impl ClosedCurve for PiecewiseLoop {
    fn length(&self) -> f64 {
        self.length
    }

    fn at(&self, s: f64) -> (Vec3, Vec3) {
        let s = s.rem_euclid(self.length);
        let k = self.starts.partition_point(|&x| x <= s).saturating_sub(1);
        let (p, t) = self.pieces[k].at(s - self.starts[k]);
        (p, right_of(t))
    }

    fn locate(&self, p: &Vec3) -> (f64, f64) {
        self.pieces
            .iter()
            .zip(&self.starts)
            .map(|(piece, s0)| {
                let (s, d) = piece.nearest(p);
                (s0 + s, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty")
    }
}

/// Axis-aligned ellipse centred at the origin, counterclockwise from `(a, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipse {
    a: f64,
    b: f64,
    /// Cumulative arclength at `t = k * dt`.
    table: Vec<f64>,
    dt: f64,
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(RegulusError::InvalidInput(format!(
                "ellipse semi-axes must be positive, got {a} and {b}"
            )));
        }
        let k = 4096;
        let dt = TAU / k as f64;
        let mut table = Vec::with_capacity(k + 1);
        table.push(0.0);
        let mut me = Self {
            a,
            b,
            table: Vec::new(),
            dt,
        };
        let mut acc = 0.0;
        for i in 0..k {
            acc += me.integrate(i as f64 * dt, (i + 1) as f64 * dt);
            table.push(acc);
        }
        me.table = table;
        Ok(me)
    }

    fn speed(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (self.a * self.a * s * s + self.b * self.b * c * c).sqrt()
    }

    fn integrate(&self, t0: f64, t1: f64) -> f64 {
        let (m, h) = (0.5 * (t0 + t1), 0.5 * (t1 - t0));
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(x, w)| w * self.speed(m + h * x))
            .sum::<f64>()
            * h
    }

    /// Arclength from `t = 0` to parameter `t` in `[0, 2 pi)`.
    fn arclength(&self, t: f64) -> f64 {
        let t = t.rem_euclid(TAU);
        let k = ((t / self.dt) as usize).min(self.table.len() - 2);
        self.table[k] + self.integrate(k as f64 * self.dt, t)
    }

    /// Parameter at arclength `s`.
    fn param(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.length());
        let k = self.table.partition_point(|&x| x <= s).clamp(1, self.table.len() - 1) - 1;
        let (s0, s1) = (self.table[k], self.table[k + 1]);
        let mut t = (k as f64 + (s - s0) / (s1 - s0)) * self.dt;
        for _ in 0..8 {
            let f = self.arclength(t) - s;
            t -= f / self.speed(t);
            if f.abs() < 1e-15 * self.length() {
                break;
            }
        }
        t
    }

    fn point_normal(&self, t: f64) -> (Vec3, Vec3) {
        let (s, c) = t.sin_cos();
        let n = planar(self.b * c, self.a * s);
        (planar(self.a * c, self.b * s), n / n.norm())
    }
}

impl ClosedCurve for Ellipse {
    fn length(&self) -> f64 {
        *self.table.last().expect("non-empty table")
    }

    fn at(&self, s: f64) -> (Vec3, Vec3) {
        self.point_normal(self.param(s))
    }

    fn locate(&self, p: &Vec3) -> (f64, f64) {
        // Coarse scan followed by Newton on the squared distance.
        let m = 720;
        let dist2 = |t: f64| {
            let (s, c) = t.sin_cos();
            (self.a * c - p.x).powi(2) + (self.b * s - p.y).powi(2)
        };
        let mut t = (0..m)
            .map(|k| TAU * k as f64 / m as f64)
            .min_by(|x, y| dist2(*x).total_cmp(&dist2(*y)))
            .expect("non-empty");
        for _ in 0..50 {
            let (s, c) = t.sin_cos();
            let (dx, dy) = (self.a * c - p.x, self.b * s - p.y);
            let g = -dx * self.a * s + dy * self.b * c;
            let h = self.a * self.a * s * s + self.b * self.b * c * c - dx * self.a * c - dy * self.b * s;
            let step = if h > 0.0 { g / h } else { g.signum() * 1e-3 };
            t -= step.clamp(-0.1, 0.1);
            if step.abs() < 1e-15 {
                break;
            }
        }
        let t = t.rem_euclid(TAU);
        (self.arclength(t), dist2(t).sqrt())
    }
}

/// Shorter arc between two arclength positions on a closed curve.
pub fn arc_distance(length: f64, s1: f64, s2: f64) -> f64 {
    let d = (s1 - s2).abs().rem_euclid(length);
    d.min(length - d)
}

pub(crate) fn circle(radius: f64, ccw: bool) -> Piece {
    Piece::Arc {
        center: Vec3::zeros(),
        radius,
        theta0: 0.0,
        sweep: if ccw { TAU } else { -TAU },
    }
}

/// Stadium-like rectangle of size `w x h` with corner radius `rho`.
pub(crate) fn rounded_rectangle(w: f64, h: f64, rho: f64) -> Vec<Piece> {
    let (x, y) = (0.5 * w, 0.5 * h);
    let arc = |cx: f64, cy: f64, theta0: f64| Piece::Arc {
        center: planar(cx, cy),
        radius: rho,
        theta0,
        sweep: 0.5 * PI,
    };
    vec![
        Piece::Segment {
            a: planar(x, -y + rho),
            b: planar(x, y - rho),
        },
        arc(x - rho, y - rho, 0.0),
        Piece::Segment {
            a: planar(x - rho, y),
            b: planar(-x + rho, y),
        },
        arc(-x + rho, y - rho, 0.5 * PI),
        Piece::Segment {
            a: planar(-x, y - rho),
            b: planar(-x, -y + rho),
        },
        arc(-x + rho, -y + rho, PI),
        Piece::Segment {
            a: planar(-x + rho, -y),
            b: planar(x - rho, -y),
        },
        arc(x - rho, -y + rho, 1.5 * PI),
    ]
}

/// Two disks of radius `disk_r` with centres `center_gap` apart, joined by
/// a straight neck of width `neck_gap` through concave fillets of radius
/// `fillet`.
pub(crate) fn dumbbell(disk_r: f64, center_gap: f64, neck_gap: f64, fillet: f64) -> Result<Vec<Piece>> {
    if !(disk_r > 0.0 && center_gap > 0.0 && neck_gap > 0.0 && fillet > 0.0) {
        return Err(RegulusError::InconsistentShape(
            "dumbbell dimensions must be positive".into(),
        ));
    }
    if !(neck_gap < 2.0 * disk_r) {
        return Err(RegulusError::InconsistentShape(format!(
            "neck gap {neck_gap} must be narrower than the disks (diameter {})",
            2.0 * disk_r
        )));
    }
    let yf = 0.5 * neck_gap + fillet;
    let dx = ((disk_r + fillet).powi(2) - yf * yf).sqrt();
    let fx = 0.5 * center_gap - dx;
    if !(fx > 0.0) {
        return Err(RegulusError::InconsistentShape(format!(
            "centre gap {center_gap} leaves no room for a neck between fillets of radius {fillet}"
        )));
    }
    let g = 0.5 * neck_gap;
    let c = 0.5 * center_gap;
    let beta = yf.atan2(dx);
    let arc = |cx: f64, cy: f64, radius: f64, theta0: f64, sweep: f64| Piece::Arc {
        center: planar(cx, cy),
        radius,
        theta0,
        sweep,
    };
    Ok(vec![
        Piece::Segment {
            a: planar(-fx, -g),
            b: planar(fx, -g),
        },
        arc(fx, -yf, fillet, 0.5 * PI, beta - 0.5 * PI),
        arc(c, 0.0, disk_r, -(PI - beta), 2.0 * (PI - beta)),
        arc(fx, yf, fillet, -beta, beta - 0.5 * PI),
        Piece::Segment {
            a: planar(fx, g),
            b: planar(-fx, g),
        },
        arc(-fx, yf, fillet, -0.5 * PI, beta - 0.5 * PI),
        arc(-c, 0.0, disk_r, beta, TAU - 2.0 * beta),
        arc(-fx, -yf, fillet, PI - beta, beta - 0.5 * PI),
    ])
}
