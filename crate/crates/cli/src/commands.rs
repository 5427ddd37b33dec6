use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::time::Instant;

use regulus::certifier::{certify, estimate_max_r, Overall};
use regulus::geometry::Radius;
use regulus::intrinsic::{
    analyze_pairs, arctan_bound_check, chord_double, geo_lip_certificate, geodesic, intrinsic_distance, GeodesicOptions,
};
use regulus::shapes::io::{self, Format};
use regulus::shapes::level_set::Bounds;
use regulus::shapes::{generate, ShapeKind, ShapeSpec};
use regulus::{Boundary, IndexedBoundary, RegulusError, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{AnalyzeArgs, CertifyArgs, EstimateArgs, GenArgs, GeodesicArgs, GlobalOpts, Input, ShapeName};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<RegulusError> for Failure {
    fn from(e: RegulusError) -> Self {
        Failure::usage(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

#[derive(Serialize)]
struct ShapeSummary {
    kind: String,
    source: String,
    samples: usize,
    dim: usize,
    r: f64,
    resolution_h: f64,
    components: usize,
}

impl ShapeSummary {
    fn new(kind: &str, source: &Path, b: &Boundary) -> Self {
        let s = b.summary();
        Self {
            kind: kind.to_string(),
            source: source.display().to_string(),
            samples: s.samples,
            dim: s.dim,
            r: s.r,
            resolution_h: s.resolution_h,
            components: s.components,
        }
    }
}

#[derive(Serialize)]
struct Timing {
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    parameters: Value,
    shape: ShapeSummary,
    results: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

struct Context<'a> {
    global: &'a GlobalOpts,
    started: Instant,
}

impl<'a> Context<'a> {
    fn tolerances(&self) -> Tolerances {
        let tol = Tolerances::default().with_rel(self.global.tol_rel);
        match self.global.tol_geo {
            Some(g) => tol.with_geo(g),
            None => tol,
        }
    }

    fn emit<R: Serialize>(
        &self,
        command: &str,
        parameters: Value,
        shape: ShapeSummary,
        results: R,
        dest: Option<&Path>,
    ) -> Result<(), Failure> {
        let env = Envelope {
            schema_version: 1,
            tool: "regulus",
            version: env!("CARGO_PKG_VERSION"),
            command,
            parameters,
            shape,
            results,
            timing: self.global.timing.then(|| Timing {
                elapsed_ms: self.started.elapsed().as_secs_f64() * 1e3,
            }),
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| Failure::usage(e.to_string()))?;
        text.push('\n');
        match dest {
            Some(p) if p != Path::new("-") => {
                fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display())))
            }
            _ => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

pub fn run(global: &GlobalOpts, command: &crate::args::Command) -> CmdResult {
    use crate::args::Command;
    let cx = Context {
        global,
        started: Instant::now(),
    };
    for (name, v) in [("--tol-rel", Some(global.tol_rel)), ("--tol-geo", global.tol_geo)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::usage(format!("{name} must be positive, got {v}")));
            }
        }
    }
    match command {
        Command::Gen(a) => cmd_gen(&cx, a),
        Command::Certify(a) => cmd_certify(&cx, a),
        Command::EstimateR(a) => cmd_estimate_r(&cx, a),
        Command::Geodesic(a) => cmd_geodesic(&cx, a),
        Command::AnalyzePairs(a) => cmd_analyze_pairs(&cx, a),
    }
}

fn radius(r: f64) -> Result<Radius, Failure> {
    Radius::new(r).map_err(|_| Failure::usage(format!("radius must be positive and finite, got {r}")))
}

fn load(input: &Input) -> Result<(Boundary, String), Failure> {
    let format = match &input.format {
        Some(f) => Some(f.parse::<Format>()?),
        None => None,
    };
    let kind = format
        .or_else(|| Format::from_path(&input.path))
        .map(|f| format!("{f:?}").to_ascii_lowercase())
        .unwrap_or_else(|| "unknown".into());
    let b = io::load(&input.path, format, None)?;
    Ok((b, kind))
}

fn shape_kind(a: &GenArgs) -> Result<ShapeKind, Failure> {
    let name = a.shape.expect("clap requires --shape without --spec");
    let or = |v: Option<f64>, d: f64| v.unwrap_or(d);
    Ok(match name {
        ShapeName::Circle => ShapeKind::Circle {
            radius: or(a.radius, 1.0),
        },
        ShapeName::Ellipse => ShapeKind::Ellipse {
            a: or(a.a, 2.0),
            b: or(a.b, 1.0),
        },
        ShapeName::Annulus => ShapeKind::Annulus {
            r_in: or(a.r_in, 1.0),
            r_out: or(a.r_out, 3.0),
        },
        ShapeName::RoundedRectangle => ShapeKind::RoundedRectangle {
            width: or(a.width, 4.0),
            height: or(a.height, 2.0),
            fillet: or(a.fillet, 1.0),
        },
        ShapeName::Dumbbell => ShapeKind::Dumbbell {
            disk_r: or(a.disk_r, 2.0),
            center_gap: or(a.center_gap, 10.0),
            neck_gap: or(a.neck_gap, 0.2),
            fillet: or(a.fillet, 0.5),
        },
        ShapeName::Implicit => {
            let expr = a
                .expr
                .clone()
                .ok_or_else(|| Failure::usage("--shape implicit needs --expr"))?;
            let bounds = match a.bounds.as_deref() {
                Some(&[x0, y0, x1, y1]) => Bounds::new(x0, y0, x1, y1)?,
                Some(_) => return Err(Failure::usage("--bounds takes x0,y0,x1,y1")),
                None => Bounds::new(-4.0, -4.0, 4.0, 4.0)?,
            };
            ShapeKind::Implicit {
                expr,
                bounds,
                grid: a.grid.unwrap_or(512),
            }
        }
    })
}

fn cmd_gen(cx: &Context, a: &GenArgs) -> CmdResult {
    let mut spec = match &a.spec {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<ShapeSpec>(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => ShapeSpec::new(shape_kind(a)?),
    };
    if let Some(n) = a.n {
        spec.n = Some(n);
    }
    if let Some(r) = a.r {
        spec.r = r;
    }
    let g = generate(&spec)?;
    io::save_csv(&g.boundary, &a.out)?;
    let reach = spec.kind.exact_reach();
    let summary = ShapeSummary::new(spec.kind.name(), &a.out, &g.boundary);
    match &a.json {
        Some(dest) => cx.emit(
            "gen",
            serde_json::to_value(&spec).map_err(|e| Failure::usage(e.to_string()))?,
            summary,
            json!({ "out": a.out.display().to_string(), "exact_reach": reach }),
            Some(dest),
        )?,
        None => eprintln!("wrote {} samples to {}", g.boundary.len(), a.out.display()),
    }
    Ok(EXIT_OK)
}

fn cmd_certify(cx: &Context, a: &CertifyArgs) -> CmdResult {
    let (b, kind) = load(&a.input)?;
    let r = a.r.unwrap_or(b.r());
    let rad = radius(r)?;
    let tol = cx.tolerances();
    let summary = ShapeSummary::new(&kind, &a.input.path, &b);
    let ix = IndexedBoundary::new(b)?;
    let report = certify(&ix, rad, &tol)?;
    if let Some(path) = &a.svg {
        fs::write(path, svg::render(ix.boundary(), &report.witnesses))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let code = match report.overall {
        Overall::Certified => EXIT_OK,
        Overall::Refuted => EXIT_REFUTED,
        Overall::Inconclusive => EXIT_INCONCLUSIVE,
    };
    cx.emit(
        "certify",
        json!({ "r": r, "tol_rel": tol.rel, "tol_geo": tol.geo }),
        summary,
        &report,
        a.input.json.as_deref(),
    )?;
    Ok(code)
}

fn cmd_estimate_r(cx: &Context, a: &EstimateArgs) -> CmdResult {
    let (b, kind) = load(&a.input)?;
    let hi = match a.hi {
        Some(h) => h,
        None => {
            let (lo, up) = b.bounding_box();
            0.5 * (up - lo).norm()
        }
    };
    let hi_r = radius(hi)?;
    let tol = cx.tolerances();
    let summary = ShapeSummary::new(&kind, &a.input.path, &b);
    let ix = IndexedBoundary::new(b)?;
    let est = match estimate_max_r(&ix, hi_r, &tol, a.rel_gap) {
        Ok(est) => est,
        Err(e @ (RegulusError::AllRefuted(_) | RegulusError::Degenerate(_))) => {
            return Err(Failure {
                code: EXIT_DEGENERATE,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    cx.emit(
        "estimate-r",
        json!({ "hi": hi, "rel_gap": a.rel_gap, "tol_rel": tol.rel, "tol_geo": tol.geo }),
        summary,
        est,
        a.input.json.as_deref(),
    )?;
    Ok(EXIT_OK)
}

fn cmd_geodesic(cx: &Context, a: &GeodesicArgs) -> CmdResult {
    let (b, kind) = load(&a.input)?;
    let r = a.r.unwrap_or(b.r());
    let rad = radius(r)?;
    let tol = cx.tolerances();
    let summary = ShapeSummary::new(&kind, &a.input.path, &b);
    let ix = IndexedBoundary::new(b)?;
    let pair = intrinsic_distance(&ix, a.from, a.to)?;
    if !pair.reachable {
        return Err(Failure::usage(format!(
            "samples {} and {} lie on different components",
            a.from, a.to
        )));
    }
    let path = geodesic(&ix, a.from, a.to, &GeodesicOptions::default())?;
    let eps_geo = tol.eps_geo(ix.resolution_h(), r);
    let certificate = geo_lip_certificate(&path, rad, eps_geo);
    let arctan = if pair.euclidean < 2.0 * r {
        Some(arctan_bound_check(&ix, rad, &[(a.from, a.to)], &tol)?)
    } else {
        None
    };
    let mut code = EXIT_OK;
    let doubling = match a.chord_double {
        None => Value::Null,
        Some(depth) => match chord_double(&ix, a.from, a.to, depth, rad, &tol) {
            Ok(cd) => serde_json::to_value(&cd).map_err(|e| Failure::usage(e.to_string()))?,
            Err(e @ RegulusError::NoMidpoint { .. }) => {
                eprintln!("{e}");
                code = EXIT_REFUTED;
                json!({ "error": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        },
    };
    cx.emit(
        "geodesic",
        json!({ "from": a.from, "to": a.to, "r": r, "chord_double": a.chord_double,
                "tol_rel": tol.rel, "tol_geo": tol.geo }),
        summary,
        json!({
            "pair": pair,
            "geodesic": path,
            "certificate": certificate,
            "arctan_bound": arctan,
            "chord_doubling": doubling,
        }),
        a.input.json.as_deref(),
    )?;
    Ok(code)
}

fn cmd_analyze_pairs(cx: &Context, a: &AnalyzeArgs) -> CmdResult {
    let (b, kind) = load(&a.input)?;
    let r = a.r.unwrap_or(b.r());
    let rad = radius(r)?;
    let summary = ShapeSummary::new(&kind, &a.input.path, &b);
    let ix = IndexedBoundary::new(b)?;
    let pairs = analyze_pairs(&ix, rad, a.top);
    let flagged = pairs.iter().filter(|p| p.flagged).count();
    cx.emit(
        "analyze-pairs",
        json!({ "r": r, "top": a.top }),
        summary,
        json!({ "threshold": FRAC_PI_2, "flagged": flagged, "pairs": pairs }),
        a.input.json.as_deref(),
    )?;
    Ok(EXIT_OK)
}
