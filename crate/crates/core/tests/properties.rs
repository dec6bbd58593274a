use std::sync::Arc;

use hamsys::elliptic::{assemble, helmholtz_solve};
use hamsys::functional::{
    energy, energy_terms, helmholtz_apply, nehari_scale, szulkin_slack, ExponentPair, WeightPair,
};
use hamsys::solver::radiality_measure;
use hamsys::spectral::{comparison_check, symmetry_criterion};
use hamsys::{build_grid, DomainSpec, Field, Grid};
use proptest::prelude::*;

fn grid(m: usize, n: usize) -> Arc<Grid> {
    build_grid(DomainSpec::new(m, n, 1.0, 13, 9).with_outer_radius(3.0)).unwrap()
}

/// Smooth positive cone-like field from a few coefficients, zero at both radii.
fn field(g: &Arc<Grid>, c: &[f64]) -> Field {
    let c = c.to_vec();
    Field::from_fn(g.clone(), move |r, t| {
        let x = (r - 1.0) / 2.0;
        let s = (std::f64::consts::PI * x).sin();
        s * (1.0 + c[0].abs() + c[1] * (2.0 * t).cos() * 0.3 + c[2] * x * 0.3)
    })
}

fn decomposition() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 2)), Just((3, 2)), Just((3, 3)), Just((4, 2))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn helmholtz_is_symmetric_in_the_mass_inner_product(
        (m, n) in decomposition(),
        a in prop::collection::vec(-1.0f64..1.0, 3),
        b in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let g = grid(m, n);
        let u = field(&g, &a);
        let w = field(&g, &b).axpy(-1.0, &u).unwrap();
        let lu = helmholtz_apply(&u);
        let lw = helmholtz_apply(&w);
        let (x, y) = (lu.inner(&w), u.inner(&lw));
        prop_assert!((x - y).abs() <= 1e-11 * x.abs().max(y.abs()).max(1.0));
    }

    #[test]
    fn solve_inverts_apply(
        (m, n) in decomposition(),
        a in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let g = grid(m, n);
        let u = field(&g, &a);
        let mut f = helmholtz_apply(&u);
        f.zero_boundary();
        let back = helmholtz_solve(&assemble(&g), &f, 1e-13).unwrap();
        prop_assert!(back.axpy(-1.0, &u).unwrap().max_abs() <= 1e-10 * u.max_abs());
    }

    #[test]
    fn energy_scales_by_homogeneity(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        p in 2.1f64..6.0,
        dq in 0.0f64..3.0,
        t in 0.1f64..5.0,
    ) {
        let g = grid(3, 2);
        let ep = ExponentPair::new(p, p + dq).unwrap();
        let wp = WeightPair::ones(g.clone());
        let u = field(&g, &a);
        let (psi, phi) = energy_terms(&u, &wp, &ep).unwrap();
        let e = energy(&u.scaled(t), &wp, &ep).unwrap().total;
        let expect = t.powf(ep.p_conj()) / ep.p_conj() * psi - t.powf(ep.q) / ep.q * phi;
        prop_assert!((e - expect).abs() <= 1e-10 * (e.abs() + expect.abs()).max(1e-300));
    }

    #[test]
    fn nehari_scale_is_inverse_homogeneous(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        p in 2.1f64..6.0,
        dq in 0.0f64..3.0,
        c in 0.1f64..10.0,
    ) {
        let g = grid(3, 2);
        let ep = ExponentPair::new(p, p + dq).unwrap();
        let wp = WeightPair::ones(g.clone());
        let u = field(&g, &a);
        let t = nehari_scale(&u, &wp, &ep).unwrap();
        let tc = nehari_scale(&u.scaled(c), &wp, &ep).unwrap();
        prop_assert!((tc * c - t).abs() <= 1e-10 * t);
        // the ray energy peaks at t*
        let f = |s: f64| energy(&u.scaled(s), &wp, &ep).unwrap().total;
        prop_assert!(f(t) >= f(t * 0.99) && f(t) >= f(t * 1.01));
    }

    #[test]
    fn szulkin_slack_vanishes_at_the_point_itself(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        p in 2.1f64..6.0,
    ) {
        let g = grid(3, 2);
        let ep = ExponentPair::new(p, p).unwrap();
        let wp = WeightPair::ones(g.clone());
        let u = field(&g, &a);
        prop_assert_eq!(szulkin_slack(&u, &u, &wp, &ep).unwrap(), 0.0);
    }

    #[test]
    fn radiality_is_scale_invariant_and_zero_on_radial_fields(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        c in 0.01f64..100.0,
    ) {
        let g = grid(4, 2);
        let u = field(&g, &a);
        let r = radiality_measure(&u).unwrap();
        prop_assert!((radiality_measure(&u.scaled(c)).unwrap() - r).abs() <= 1e-12);
        prop_assert!(radiality_measure(&u.radial_average()).unwrap() <= 1e-14);
    }

    #[test]
    fn comparison_is_exact_for_equal_components(
        a in prop::collection::vec(-1.0f64..1.0, 3),
        p in 2.1f64..8.0,
    ) {
        let g = grid(3, 2);
        let u = field(&g, &a);
        let ep = ExponentPair::new(p, p).unwrap();
        let c = comparison_check(&u, &u, &ep, 0.0).unwrap();
        prop_assert_eq!(c.min_margin, 0.0);
        prop_assert!(c.pass);
    }

    #[test]
    fn criterion_verdict_is_the_inequality(
        p in 2.01f64..12.0,
        dq in 0.0f64..6.0,
        dim in 4usize..12,
        hardy in 0.5f64..30.0,
    ) {
        let ep = ExponentPair::new(p, p + dq).unwrap();
        let c = symmetry_criterion(dim, &ep, hardy);
        let lhs = (p - 1.0) * (p + dq - 1.0);
        let rhs = (1.0 + 2.0 * dim as f64 / hardy).powi(2) * (p + dq) / p;
        prop_assert_eq!(c.lhs, lhs);
        prop_assert_eq!(c.rhs, rhs);
        prop_assert_eq!(c.holds, lhs > rhs);
    }

    #[test]
    fn window_is_the_two_case_dichotomy(
        p in 2.01f64..12.0,
        dq in 0.0f64..6.0,
        n in 2usize..8,
    ) {
        let ep = ExponentPair::new(p, p + dq).unwrap();
        let q = p + dq;
        let needs = n as f64 > (p + 1.0) / (p - 1.0);
        prop_assert_eq!(ep.needs_lower_bound(n), needs);
        let ok = !needs || 1.0 / p + 1.0 / q > 1.0 - 2.0 / (n as f64 + 1.0);
        prop_assert_eq!(ep.window_ok(n), ok);
    }
}
