mod support;

use std::f64::consts::PI;

use proptest::prelude::*;
use regulus::geometry::{iterate_psi, Radius};
use regulus::intrinsic::{analyze_pairs, chord_double, geodesic, intrinsic_distance, GeodesicOptions};
use regulus::shapes::ShapeKind;
use regulus::Tolerances;
use support::{builtins, indexed};

fn idx(n: usize, u: f64) -> usize {
    ((n as f64 * u) as usize).min(n - 1)
}

#[test]
fn flat_runs_have_unit_ratio() {
    let ix = indexed(
        ShapeKind::RoundedRectangle {
            width: 6.0,
            height: 3.0,
            fillet: 1.0,
        },
        Some(3000),
        1.0,
    );
    // Samples on the bottom side, y = -1.5 and |x| < 2.
    let flat: Vec<usize> = (0..ix.len())
        .filter(|&i| {
            let p = ix.point(i);
            (p.y + 1.5).abs() < 1e-12 && p.x.abs() < 1.9
        })
        .collect();
    assert!(flat.len() > 100);
    for (k, &i) in flat.iter().enumerate().step_by(13) {
        for &j in flat.iter().skip(k + 1).step_by(29) {
            let d = intrinsic_distance(&ix, i, j).unwrap();
            assert!((d.ratio - 1.0).abs() <= 1e-12, "{d:?}");
        }
    }
}

#[test]
fn circle_ratio_peaks_at_antipodes() {
    let ix = indexed(ShapeKind::Circle { radius: 1.0 }, Some(2000), 1.0);
    let top = analyze_pairs(&ix, Radius::new(1.0 + 1e-6).unwrap(), 3);
    for p in &top {
        assert!((p.pair.ratio - PI / 2.0).abs() <= 0.01 * PI / 2.0);
        let gap = p.pair.j - p.pair.i;
        assert_eq!(gap.min(2000 - gap), 1000);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_inequality(which in 0usize..5, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let ix = indexed(builtins()[which].clone(), Some(1200), 0.5);
        let n = ix.len();
        let (i, j, k) = (idx(n, a), idx(n, b), idx(n, c));
        let d = |p, q| intrinsic_distance(&ix, p, q).unwrap();
        let (ij, jk, ik) = (d(i, j), d(j, k), d(i, k));
        if ik.reachable && ij.reachable {
            prop_assert!(ik.intrinsic <= ij.intrinsic + jk.intrinsic + 1e-12);
        }
        for p in [ij, jk, ik] {
            prop_assert!(!p.reachable || p.intrinsic >= p.euclidean * (1.0 - 1e-12));
        }
    }

    #[test]
    fn shortening_never_lengthens(which in 0usize..5, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let ix = indexed(builtins()[which].clone(), Some(1500), 0.5);
        let (i, j) = (idx(ix.len(), a), idx(ix.len(), b));
        prop_assume!(i != j && ix.boundary().component(i) == ix.boundary().component(j));
        let g = geodesic(&ix, i, j, &GeodesicOptions::default()).unwrap();
        prop_assert!(g.length <= g.graph_length * (1.0 + 1e-12));
        prop_assert!(g.length >= (ix.point(i) - ix.point(j)).norm() * (1.0 - 1e-12));
    }

    #[test]
    fn chord_doubling_climbs_under_psi(u in 0.01f64..0.3, depth in 1usize..8) {
        let ix = indexed(ShapeKind::Circle { radius: 1.0 }, Some(4000), 1.0);
        let j = idx(ix.len(), u);
        let tol = Tolerances::default();
        let r = Radius::new(1.0).unwrap();
        let cd = chord_double(&ix, 0, j, depth, r, &tol).unwrap();
        let eps = tol.eps_len(ix.resolution_h(), 1.0);
        for w in cd.level_lengths.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
        let bound = iterate_psi(cd.chord, r, depth as u32).unwrap();
        prop_assert!(cd.path.length <= bound + eps);
    }
}
