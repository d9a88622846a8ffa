//! Property-based invariants over randomized prisms, flips and caps.

mod common;

use common::*;
use polycap::trian::EdgeSides;
use polycap::{feasibility, prism_angles, rho, Degeneracy, PrismSpec};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Strategy: a valid triangle with sides in [0.5, 2.5].
fn triangle_sides() -> impl Strategy<Value = [f64; 3]> {
    (0.5f64..2.5, 0.5f64..2.5, 0.0f64..1.0).prop_map(|(a, b, t)| {
        let lo = (a - b).abs() * 1.02 + 0.02;
        let hi = (a + b) * 0.98;
        [a, b, lo + t * (hi - lo)]
    })
}

/// Strategy: heights giving a comfortably non-degenerate prism.
fn prism_spec() -> impl Strategy<Value = PrismSpec<f64>> {
    (triangle_sides(), 0.0f64..0.4, 0.0f64..0.4, 0.0f64..0.4)
        .prop_map(|(len, h0, h1, h2)| PrismSpec::new(len, [h0, h1, h2]))
        .prop_filter("non-degenerate", |spec| {
            matches!(
                prism_angles(spec),
                Ok(a) if a.degeneracy == Degeneracy::NonDegenerate && a.slope < 0.92
            )
        })
}

proptest! {
    #[test]
    fn rho_pairs_sum_to_pi(l in 0.6f64..3.0, ha in 0.0f64..0.5, hb in 0.0f64..0.5) {
        let r1 = rho(l, ha, hb).unwrap();
        let r2 = rho(l, hb, ha).unwrap();
        prop_assert!((r1 + r2 - PI).abs() < 1e-12);
    }

    #[test]
    fn projection_shortens(l in 0.6f64..3.0, ha in 0.0f64..0.5, hb in 0.0f64..0.5) {
        let lp = polycap::project_length(l, ha, hb).unwrap();
        prop_assert!(lp <= l + 1e-15);
        if ha == hb {
            prop_assert!((lp - l).abs() < 1e-15);
        }
    }

    /// Intrinsic angle formulas against the explicit 3D embedding.
    #[test]
    fn prism_angles_match_3d_oracle(spec in prism_spec()) {
        let a = prism_angles(&spec).unwrap();
        let oracle = prism_oracle(spec.len, spec.h);
        for s in 0..3 {
            prop_assert!((a.alpha[s] - oracle.alpha[s]).abs() < 1e-9,
                "alpha[{s}]: {} vs {}", a.alpha[s], oracle.alpha[s]);
            prop_assert!((a.omega[s] - oracle.omega[s]).abs() < 1e-9,
                "omega[{s}]: {} vs {}", a.omega[s], oracle.omega[s]);
        }
        prop_assert!((a.eta[0] - oracle.eta).abs() < 1e-9,
            "eta: {} vs {}", a.eta[0], oracle.eta);
    }

    /// Shrinking all heights towards a constant drives the prism to a right
    /// one: dihedrals to π/2 and the projected angles to the base angles.
    #[test]
    fn monotone_degeneracy_towards_flat(spec in prism_spec()) {
        let mean = (spec.h[0] + spec.h[1] + spec.h[2]) / 3.0;
        let at = |t: f64| {
            let h = [
                mean + t * (spec.h[0] - mean),
                mean + t * (spec.h[1] - mean),
                mean + t * (spec.h[2] - mean),
            ];
            prism_angles(&PrismSpec::new(spec.len, h)).unwrap()
        };
        let tiny = at(1e-6);
        for s in 0..3 {
            prop_assert!((tiny.alpha[s] - PI / 2.0).abs() < 1e-5);
            let base = polycap::trian::Triangulation::new(
                3,
                vec![polycap::Tri { v: [0, 1, 2], len: spec.len }],
                &[],
            )
            .unwrap()
            .corner_angle(0, s);
            prop_assert!((tiny.omega[s] - base).abs() < 1e-5);
        }
    }

    /// Flipping a flipped edge restores the original diagonal length.
    #[test]
    fn flip_is_an_involution_on_lengths(
        x2 in -0.6f64..0.6, y2 in 0.7f64..1.8,
        x3 in -0.6f64..0.6, y3 in 0.7f64..1.8,
    ) {
        // Quad (0,0), (1,0), apexes above and below.
        let p0 = [0.0, 0.0];
        let p1 = [1.0, 0.0];
        let pa = [x2, y2];
        let pb = [x3, -y3];
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0]-b[0]).powi(2) + (a[1]-b[1]).powi(2)).sqrt();
        let tris = vec![
            polycap::Tri { v: [2usize, 0, 1], len: [d(p0, p1), d(p1, pa), d(p0, pa)] },
            polycap::Tri { v: [3, 1, 0], len: [d(p0, p1), d(p0, pb), d(p1, pb)] },
        ];
        let t = polycap::Triangulation::new(
            4,
            tris,
            &[(polycap::Side::new(0, 0), polycap::Side::new(1, 0))],
        )
        .unwrap();
        let edge = (polycap::Side::new(0, 0), polycap::Side::new(1, 0));
        match polycap::flip_edge(&t, edge.0, edge.1) {
            Ok(f) => {
                let diag = d(pa, pb);
                let e2 = f.edges().into_iter().find_map(|e| match e.sides {
                    EdgeSides::Interior(a, b) => Some((a, b)),
                    _ => None,
                }).unwrap();
                prop_assert!((f.side_len(e2.0) - diag).abs() < 1e-10);
                let back = polycap::flip_edge(&f, e2.0, e2.1).unwrap();
                let e3 = back.edges().into_iter().find_map(|e| match e.sides {
                    EdgeSides::Interior(a, b) => Some((a, b)),
                    _ => None,
                }).unwrap();
                prop_assert!((back.side_len(e3.0) - 1.0).abs() < 1e-10);
            }
            Err(_) => {
                // Only legitimate for a non-convex quadrilateral.
                let cross_at = pa[0] + (pb[0] - pa[0]) * pa[1] / (pa[1] + y3);
                prop_assert!(!(1e-6..1.0 - 1e-6).contains(&cross_at));
            }
        }
    }

    /// Convex combinations of feasible heights stay feasible.
    #[test]
    fn cap_space_convex_combination(
        a in 0.0f64..1.4, b in 0.0f64..1.4, lambda in 0.0f64..1.0,
    ) {
        let disk = square_pyramid();
        let feas = |h_apex: f64| feasibility(&disk, &[h_apex, 0.0, 0.0, 0.0, 0.0], None).is_ok();
        if feas(a) && feas(b) {
            prop_assert!(feas(lambda * a + (1.0 - lambda) * b));
        }
    }
}

#[test]
fn wall_limit_is_continuous() {
    // Approaching the wall from inside, α and ω converge to the snapped
    // limit values of the degenerate prism.
    let exact = prism_angles(&PrismSpec::new([2.0, SQRT2, SQRT2], [1.0, 0.0, 0.0])).unwrap();
    assert_eq!(exact.degeneracy, Degeneracy::TypeA);
    for k in 3..8 {
        let eps = 10f64.powi(-k);
        let near = prism_angles(&PrismSpec::new([2.0, SQRT2, SQRT2], [1.0 - eps, 0.0, 0.0])).unwrap();
        assert_eq!(near.degeneracy, Degeneracy::NonDegenerate);
        let scale = eps.sqrt() * 10.0;
        for s in 0..3 {
            assert!((near.alpha[s] - exact.alpha[s]).abs() < scale);
            assert!((near.omega[s] - exact.omega[s]).abs() < scale);
        }
        assert!((near.eta[0] - exact.eta[0]).abs() < scale);
    }
}
