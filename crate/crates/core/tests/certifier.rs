mod support;

use regulus::certifier::{certify, estimate_max_r, Evidence, Overall, Verdict};
use regulus::geometry::Radius;
use regulus::{IndexedBoundary, Tolerances};
use support::{builtins, indexed, sampled, scaled};

const FACTORS: [f64; 5] = [0.5, 0.9, 0.99, 1.01, 1.5];

fn rad(r: f64) -> Radius {
    Radius::new(r).unwrap()
}

#[test]
fn certification_is_monotone_in_radius() {
    let tol = Tolerances::default();
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        let mut certified_above = false;
        for f in FACTORS.iter().rev() {
            let rep = certify(&ix, rad(f * reach), &tol).unwrap();
            let ok = rep.overall == Overall::Certified;
            assert!(
                !certified_above || ok,
                "{} not certified at {f} but certified above",
                kind.name()
            );
            certified_above |= ok;
        }
        assert!(certified_above, "{} never certified", kind.name());
    }
}

#[test]
fn verdicts_straddle_the_reach() {
    let tol = Tolerances::default();
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        for f in FACTORS {
            let rep = certify(&ix, rad(f * reach), &tol).unwrap();
            if f <= 0.99 {
                assert_eq!(rep.overall, Overall::Certified, "{} at {f}", kind.name());
            }
            if f >= 1.5 {
                assert_eq!(rep.overall, Overall::Refuted, "{} at {f}", kind.name());
                assert!(!rep.witnesses.is_empty());
            }
            let (a, b) = (rep.conditions(), rep.ball_oracle.verdict);
            if a != Verdict::Inconclusive && b != Verdict::Inconclusive {
                assert_eq!(a, b, "{} at {f}", kind.name());
            }
        }
    }
}

#[test]
fn estimates_land_below_the_exact_reach() {
    let tol = Tolerances::default();
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        let est = estimate_max_r(&ix, rad(2.0 * reach), &tol, 1e-3).unwrap();
        let q = est.r_lo / reach;
        // The upper end allows for the discretization budget at the reach.
        assert!(
            (0.96..=1.0 + 2.0 * ix.resolution_h() / reach).contains(&q),
            "{}: {q}",
            kind.name()
        );
        assert!(est.r_hi > est.r_lo);
    }
}

#[test]
fn estimates_scale_with_the_shape() {
    let tol = Tolerances::default();
    let kind = builtins()[1].clone();
    let b = sampled(kind, Some(2000), 0.5);
    let base = estimate_max_r(&IndexedBoundary::new(b.clone()).unwrap(), rad(1.0), &tol, 1e-3).unwrap();
    for lambda in [0.1, 3.0] {
        let ix = IndexedBoundary::new(scaled(&b, lambda)).unwrap();
        let est = estimate_max_r(&ix, rad(lambda), &tol, 1e-3).unwrap();
        let step = base.r_hi - base.r_lo;
        assert!(
            (est.r_lo / lambda - base.r_lo).abs() <= step * 1.001 + 1e-12,
            "lambda {lambda}: {} vs {}",
            est.r_lo / lambda,
            base.r_lo
        );
    }
}

#[test]
fn witnesses_do_not_depend_on_the_schedule() {
    let tol = Tolerances::default();
    let ix = indexed(builtins()[4].clone(), Some(4000), 0.5);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| certify(&ix, rad(0.5), &tol).unwrap())
    };
    let (a, b) = (run(1), run(6));
    assert_eq!(a, b);
    assert!(matches!(a.witnesses.first(), Some(Evidence::IntrinsicDistance { .. })));
}
