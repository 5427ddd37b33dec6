mod support;

use proptest::prelude::*;
use regulus::normal_field::{estimate_lipschitz, normality_defect, quadrado_checks};
use regulus::shapes::ShapeKind;
use regulus::{IndexedBoundary, Tolerances};
use support::{builtins, indexed, sampled, scaled};

#[test]
fn lipschitz_on_circles_is_r_over_radius() {
    for (radius, r, n) in [(2.0, 1.0, 500), (2.0, 1.0, 2000), (0.5, 0.25, 1000), (3.0, 2.5, 3000)] {
        let ix = indexed(ShapeKind::Circle { radius }, Some(n), r);
        let lip = estimate_lipschitz(&ix).unwrap().lip_estimate;
        assert!((lip - r / radius).abs() <= 1e-9, "R = {radius}, r = {r}: {lip}");
    }
}

#[test]
fn ellipse_lipschitz_converges() {
    // Largest curvature of the (2, 1) ellipse is 2, at the ends of the major axis.
    let mut prev = f64::INFINITY;
    for n in [1000, 2000, 4000, 8000] {
        let ix = indexed(ShapeKind::Ellipse { a: 2.0, b: 1.0 }, Some(n), 0.5);
        let err = (estimate_lipschitz(&ix).unwrap().lip_estimate - 1.0).abs();
        assert!(err <= 4.0 * ix.resolution_h(), "n = {n}: {err}");
        assert!(err <= prev * 1.01);
        prev = err;
    }
}

#[test]
fn normality_defect_shrinks_with_scale() {
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        let h = ix.resolution_h();
        let mut prev = f64::INFINITY;
        let mut scale = 0.8 * reach;
        while scale >= 2.0 * h {
            let d = normality_defect(&ix, scale).unwrap().max;
            assert!(d <= prev + 1e-12, "{}: defect {d} at {scale} above {prev}", kind.name());
            prev = d;
            scale /= 2.0;
        }
    }
}

#[test]
fn builtins_pass_the_quadrado_checks() {
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        let q = quadrado_checks(&ix, &Tolerances::default());
        assert!(q.identity_ok && q.separation_ok, "{}: {q:?}", kind.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reports_are_scale_invariant(lambda in 0.05f64..20.0, which in 0usize..5) {
        let kind = builtins()[which].clone();
        let reach = kind.exact_reach().unwrap();
        let b = sampled(kind, Some(1500), reach);
        let big = IndexedBoundary::new(scaled(&b, lambda)).unwrap();
        let ix = IndexedBoundary::new(b).unwrap();
        let (l0, l1) = (estimate_lipschitz(&ix).unwrap(), estimate_lipschitz(&big).unwrap());
        prop_assert!((l0.lip_estimate - l1.lip_estimate).abs() <= 1e-9 * l0.lip_estimate);
        let s = 4.0 * ix.resolution_h();
        let d0 = normality_defect(&ix, s).unwrap().max;
        let d1 = normality_defect(&big, s * lambda).unwrap().max;
        prop_assert!((d0 - d1).abs() <= 1e-9 * d0.max(1e-12));
    }
}
