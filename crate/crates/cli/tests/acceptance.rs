//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regulus::certifier::{certify, check_condition1, check_condition2, estimate_max_r, Overall, Verdict};
use regulus::geometry::sturm::{sturm_liouville_verify, ArcPiece, SampledCurve};
use regulus::geometry::{iterate_psi, Radius};
use regulus::intrinsic::{analyze_pairs, arctan_bound_check, geodesic, sample_pairs, GeodesicOptions};
use regulus::projection::{project, projection_lipschitz_probe, quadratic_bound_check};
use regulus::shapes::{generate, io, ShapeKind, ShapeSpec};
use regulus::{IndexedBoundary, Tolerances};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rad(r: f64) -> Radius {
    Radius::new(r).unwrap()
}

fn indexed(kind: ShapeKind, n: Option<usize>, r: f64) -> IndexedBoundary {
    let mut spec = ShapeSpec::new(kind).with_r(r);
    spec.n = n;
    IndexedBoundary::new(generate(&spec).unwrap().boundary).unwrap()
}

fn circle() -> ShapeKind {
    ShapeKind::Circle { radius: 1.0 }
}

fn dumbbell() -> ShapeKind {
    ShapeKind::Dumbbell {
        disk_r: 2.0,
        center_gap: 10.0,
        neck_gap: 0.2,
        fillet: 0.5,
    }
}

fn rounded_rectangle() -> ShapeKind {
    ShapeKind::RoundedRectangle {
        width: 4.0,
        height: 3.0,
        fillet: 1.0,
    }
}

fn builtins() -> Vec<ShapeKind> {
    vec![
        circle(),
        ShapeKind::Ellipse { a: 2.0, b: 1.0 },
        ShapeKind::Annulus { r_in: 1.0, r_out: 3.0 },
        rounded_rectangle(),
        dumbbell(),
    ]
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn psi_recursion() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for s in [0.5f64, 1.0, 1.5, 1.9] {
        let closed = 2.0 * (s / (4.0 - s * s).sqrt()).atan();
        worst = worst.max((iterate_psi(s, rad(1.0), 20).unwrap() - closed).abs());
    }
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut ident: f64 = 0.0;
    for s in [0.5f64, 1.0, 1.5, 1.9] {
        let a = 2.0 * (s / (4.0 - s * s).sqrt()).atan();
        ident = ident.max((a - 2.0 * (s / 2.0).asin()).abs());
    }
    check(
        worst <= 1e-9 && elapsed < 1.0 && ident <= 1e-12,
        format!("max |psi^20 - arctan| = {worst:.2e}, {elapsed:.3} ms, arctan/asin identity {ident:.2e}"),
    )
}

fn circle_reach() -> Outcome {
    let ix = indexed(circle(), Some(2000), 1.0);
    let start = Instant::now();
    let est = estimate_max_r(&ix, rad(2.0), &Tolerances::default(), 1e-3).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        (0.98..=1.0).contains(&est.r_lo) && secs < 10.0,
        format!("r_lo = {:.6}, r_hi = {:.6}, {secs:.2} s", est.r_lo, est.r_hi),
    )
}

fn ellipse_reach() -> Outcome {
    let ix = indexed(ShapeKind::Ellipse { a: 2.0, b: 1.0 }, Some(4000), 1.0);
    let est = estimate_max_r(&ix, rad(2.0), &Tolerances::default(), 1e-3).map_err(|e| e.to_string())?;
    check(
        (0.48..=0.5).contains(&est.r_lo),
        format!("r_lo = {:.6}, r_hi = {:.6} (exact 0.5)", est.r_lo, est.r_hi),
    )
}

fn extremal_ratio() -> Outcome {
    // Just above 1 so that the antipodal pairs (distance exactly 2) are in range.
    let ix = indexed(circle(), Some(2000), 1.0);
    let top = analyze_pairs(&ix, rad(1.0 + 1e-6), 1);
    let best = top.first().ok_or("no pairs")?;
    let n = ix.len();
    let gap = (best.pair.j - best.pair.i).min(n - (best.pair.j - best.pair.i));
    check(
        (best.pair.ratio - PI / 2.0).abs() <= 0.01 && gap == n / 2,
        format!(
            "max ratio {:.6} at ({}, {}), index gap {gap} of {n}",
            best.pair.ratio, best.pair.i, best.pair.j
        ),
    )
}

fn dumbbell_separation() -> Outcome {
    let tol = Tolerances::default();
    let ix = indexed(dumbbell(), Some(4000), 0.5);
    let c1 = check_condition1(&ix, rad(0.5), &tol).map_err(|e| e.to_string())?;
    let c2 = check_condition2(&ix, rad(0.5), &tol).map_err(|e| e.to_string())?;
    let witness = c2
        .witnesses
        .iter()
        .find(|w| w.confirmed == Some(true))
        .map(|w| w.pair.euclidean);
    let small = certify(&ix, rad(0.09), &tol).map_err(|e| e.to_string())?;
    let est = estimate_max_r(&ix, rad(1.0), &tol, 1e-3).map_err(|e| e.to_string())?;
    let bracket = 0.95 * est.r_lo <= 0.1 && 0.1 <= 1.05 * est.r_hi;
    let ok = c1.verdict == Verdict::Pass
        && c1.lip_estimate <= 1.02
        && c2.verdict == Verdict::Fail
        && witness.is_some_and(|e| (0.19..=0.21).contains(&e))
        && small.overall == Overall::Certified
        && bracket;
    check(
        ok,
        format!(
            "cond1 {:?} lip {:.4}, cond2 {:?} witness e = {}, r=0.09 {:?}, bracket [{:.5}, {:.5}]",
            c1.verdict,
            c1.lip_estimate,
            c2.verdict,
            witness.map_or("none".into(), |e| format!("{e:.5}")),
            small.overall,
            est.r_lo,
            est.r_hi
        ),
    )
}

fn quadratic_bound() -> Outcome {
    let ix = indexed(circle(), Some(2000), 1.0);
    let q = quadratic_bound_check(&ix, 0.25, 0.2, 10_000, 6, &Tolerances::default()).map_err(|e| e.to_string())?;
    check(
        q.worst_slack >= -1e-6 && q.worst_sample.is_some() && q.trials + q.skipped == 10_000,
        format!(
            "worst slack {:.3e} at sample {:?}, {} trials",
            q.worst_slack, q.worst_sample, q.trials
        ),
    )
}

fn arctan_bound() -> Outcome {
    let tol = Tolerances::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, kind) in [("circle", circle()), ("rounded rectangle", rounded_rectangle())] {
        let ix = indexed(kind, None, 1.0);
        let cert = certify(&ix, rad(1.0), &tol).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs = sample_pairs(ix.boundary(), 2.0, 1000, &mut rng);
        let rep = arctan_bound_check(&ix, rad(1.0), &pairs, &tol).map_err(|e| e.to_string())?;
        ok &= cert.overall == Overall::Certified
            && rep.pairs_checked == 1000
            && rep.worst_slack >= -rep.tolerance
            && rep.max_intrinsic < PI + rep.tolerance;
        lines.push(format!(
            "{name}: {:?}, worst slack {:.2e}, max d {:.5}",
            cert.overall, rep.worst_slack, rep.max_intrinsic
        ));
    }
    check(ok, lines.join("; "))
}

fn geodesic_curvature() -> Outcome {
    let tol = Tolerances::default();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut count = 0;
    let mut ok = true;
    for kind in builtins() {
        let r = 0.99 * kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, r);
        if certify(&ix, rad(r), &tol).map_err(|e| e.to_string())?.overall != Overall::Certified {
            return Err(format!("{} not certified at r = {r}", kind.name()));
        }
        let h = ix.resolution_h();
        let bound = 1.0 / r + 2.0 * h / (r * r);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut done = 0;
        while done < 20 {
            let (i, j) = (rng.gen_range(0..ix.len()), rng.gen_range(0..ix.len()));
            if i == j || ix.boundary().component(i) != ix.boundary().component(j) {
                continue;
            }
            let path = geodesic(&ix, i, j, &GeodesicOptions::default()).map_err(|e| e.to_string())?;
            worst_excess = worst_excess.max(path.max_turn_rate * r - bound * r);
            ok &= path.max_turn_rate <= bound;
            done += 1;
        }
        count += done;
    }
    check(
        ok,
        format!("{count} geodesics on 5 builtins, worst (rate - bound) r = {worst_excess:.3e}"),
    )
}

fn sturm_liouville() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut accepted, mut rejected_d) = (0, 0);
    for _ in 0..100 {
        let r = rng.gen_range(0.5..2.0);
        let mut pieces = Vec::new();
        let mut total = 0.0;
        while total < PI * r * 1.05 {
            let length = rng.gen_range(0.05..0.6) * r;
            pieces.push(ArcPiece {
                length,
                curvature: rng.gen_range(-1.0..=1.0) / r,
            });
            total += length;
        }
        let c = SampledCurve::from_arcs(rad(r), &pieces, 1e-3 * r).map_err(|e| e.to_string())?;
        if sturm_liouville_verify(&c, rad(r), &tol)
            .map_err(|e| e.to_string())?
            .verdict
        {
            accepted += 1;
        }

        let k = rng.gen_range(0..pieces.len());
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        pieces[k].curvature = sign * 1.5 / r;
        let c = SampledCurve::from_arcs(rad(r), &pieces, 1e-3 * r).map_err(|e| e.to_string())?;
        let rep = sturm_liouville_verify(&c, rad(r), &tol).map_err(|e| e.to_string())?;
        if !rep.verdict && rep.first_failing == Some('d') {
            rejected_d += 1;
        }
    }
    check(
        accepted == 100 && rejected_d == 100,
        format!("{accepted}/100 admissible accepted, {rejected_d}/100 injected rejected at (d)"),
    )
}

fn equivalence() -> Outcome {
    let tol = Tolerances::default();
    let (mut compared, mut skipped, mut disagreements) = (0, 0, Vec::new());
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        for f in [0.5, 0.9, 0.99, 1.01, 1.5] {
            let rep = certify(&ix, rad(f * reach), &tol).map_err(|e| e.to_string())?;
            let (a, b) = (rep.conditions(), rep.ball_oracle.verdict);
            if a == Verdict::Inconclusive || b == Verdict::Inconclusive {
                skipped += 1;
            } else if a == b {
                compared += 1;
            } else {
                disagreements.push(format!("{} at {f}: {a:?} vs {b:?}", kind.name()));
            }
        }
    }
    check(
        disagreements.is_empty(),
        format!(
            "{compared} agree, {skipped} inconclusive, {} disagree {disagreements:?}",
            disagreements.len()
        ),
    )
}

fn fiber_property() -> Outcome {
    let tol = Tolerances::default();
    let mut worst_fiber: f64 = 0.0;
    let mut worst_probe: f64 = 0.0;
    let mut ok = true;
    for kind in builtins() {
        let r = 0.9 * kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, r);
        if certify(&ix, rad(r), &tol).map_err(|e| e.to_string())?.overall != Overall::Certified {
            return Err(format!("{} not certified at r = {r}", kind.name()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let p = rng.gen_range(0..ix.len());
            let t = rng.gen_range(-0.45..0.45);
            let pr = project(&(ix.point(p) + ix.eta(p) * t), &ix).map_err(|e| e.to_string())?;
            let miss = (pr.foot_point - ix.point(p)).norm() / r;
            worst_fiber = worst_fiber.max(miss);
            ok &= !pr.ambiguous && miss <= 1e-6;
        }
        let probe = projection_lipschitz_probe(&ix, 0.25, 1000, 12, &tol).map_err(|e| e.to_string())?;
        worst_probe = worst_probe.max(probe.max_ratio);
        ok &= probe.max_ratio <= 2.0f64.sqrt() + probe.tolerance;
    }
    check(
        ok,
        format!(
            "worst fiber miss {worst_fiber:.2e} r, worst stretch {worst_probe:.5} (sqrt 2 = {:.5})",
            1.0 / FRAC_1_SQRT_2
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for (name, kind, r) in [("circle", circle(), "0.99"), ("dumbbell", dumbbell(), "0.5")] {
        let path = dir.path().join(format!("{name}.csv"));
        let g = generate(&ShapeSpec::new(kind)).map_err(|e| e.to_string())?;
        io::save_csv(&g.boundary, &path).map_err(|e| e.to_string())?;
        let a = run_certify(&path, r, "1")?;
        let b = run_certify(&path, r, "8")?;
        if a != b {
            return Err(format!("{name}: outputs differ"));
        }
        lines.push(format!("{name} {} bytes identical", a.len()));
    }
    check(true, lines.join(", "))
}

fn run_certify(path: &Path, r: &str, threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_regulus"))
        .args(["certify", "--in"])
        .arg(path)
        .args(["--r", r, "--threads", threads])
        .output()
        .map_err(|e| e.to_string())?;
    if out.stdout.is_empty() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("psi recursion converges to the arctan limit", psi_recursion),
        ("circle reach", circle_reach),
        ("ellipse reach", ellipse_reach),
        ("pi/2 extremal ratio on the circle", extremal_ratio),
        ("dumbbell separates the two conditions", dumbbell_separation),
        ("quadratic tangent-ball bound", quadratic_bound),
        ("arctan upper bound on intrinsic distance", arctan_bound),
        ("geodesic curvature certificate", geodesic_curvature),
        ("Sturm-Liouville comparison verifier", sturm_liouville),
        ("conditions agree with the tangent-ball oracle", equivalence),
        ("projection fiber property and stretch", fiber_property),
        ("JSON identical across thread counts", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {name}: {detail}", k + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
