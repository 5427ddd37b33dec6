mod support;

use proptest::prelude::*;
use regulus::projection::{height, local_tangent_ball_test, project, quadratic_bound_check};
use regulus::Tolerances;
use support::{builtins, indexed};

#[test]
fn quadratic_bound_on_certified_builtins() {
    let tol = Tolerances::default();
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, 0.9 * reach);
        for s in [0.1, 0.25, 0.4] {
            let q = quadratic_bound_check(&ix, s, s * ix.r(), 2000, 3, &tol).unwrap();
            assert!(q.ok, "{} at s = {s}: {q:?}", kind.name());
        }
    }
}

#[test]
fn tangent_ball_test_is_monotone_in_radius() {
    let tol = Tolerances::default();
    for kind in builtins() {
        let reach = kind.exact_reach().unwrap();
        let ix = indexed(kind.clone(), None, reach);
        for idx in (0..ix.len()).step_by(ix.len() / 25) {
            let mut passed_above = false;
            for f in [2.0, 1.5, 1.0, 0.9, 0.5, 0.25] {
                let v = local_tangent_ball_test(&ix, idx, f * reach, 2.0 * f * reach, &tol).unwrap();
                let ok = v.inner_ok && v.outer_ok;
                assert!(
                    !passed_above || ok,
                    "{} sample {idx} fails at {f} after passing above",
                    kind.name()
                );
                passed_above |= ok;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fiber_height_and_idempotence(which in 0usize..5, u in 0.0f64..1.0, t in -0.45f64..0.45) {
        let kind = builtins()[which].clone();
        let r = 0.9 * kind.exact_reach().unwrap();
        let ix = indexed(kind, None, r);
        let p = ((ix.len() as f64 * u) as usize).min(ix.len() - 1);
        let x = ix.point(p) + ix.eta(p) * t;
        let pr = project(&x, &ix).unwrap();
        prop_assert!(!pr.ambiguous);
        prop_assert!((pr.foot_point - ix.point(p)).norm() <= 1e-6 * r);
        let eps_geo = Tolerances::default().eps_geo(ix.resolution_h(), r);
        // The height is <x - foot, eta>, and eta has length r.
        let f = height(&x, &ix).unwrap();
        prop_assert!((f - t * r * r).abs() <= eps_geo * r * r, "f = {f}, t r^2 = {}", t * r * r);
        let again = project(&pr.foot_point, &ix).unwrap();
        prop_assert!(again.refined_distance <= eps_geo * r);
    }
}
