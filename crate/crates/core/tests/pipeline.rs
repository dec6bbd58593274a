use hamsys::functional::{szulkin_check, szulkin_trials, ExponentPair, WeightPair};
use hamsys::solver::{
    continuation_solve, distinctness_check, mountain_pass_solve, multiplicity_sweep, radiality_measure,
    DistinctVerdict, SolverOptions,
};
use hamsys::spectral::{
    comparison_check, hardy_constant, hardy_grid_estimate, hardy_truncated, rayleigh_bound_check,
    spectral_report, symmetry_verdict,
};
use hamsys::{build_grid, DomainSpec};

fn radial_opts() -> SolverOptions {
    SolverOptions {
        radial_only: true,
        ..SolverOptions::default()
    }
}

#[test]
fn radial_candidate_spectral_consistency() {
    let g = build_grid(DomainSpec::new(2, 2, 1.0, 65, 33)).unwrap();
    let wp = WeightPair::ones(g.clone());
    let ep = ExponentPair::new(3.0, 3.0).unwrap();
    let sp = mountain_pass_solve(&g, &wp, &ep, &radial_opts()).unwrap();
    assert!(sp.accepted);
    assert!(radiality_measure(&sp.u).unwrap() < 1e-10);
    let hardy = hardy_constant(g.spec(), 2e-3).unwrap();
    let rep = spectral_report(&sp, hardy.value, 1e-12).unwrap();
    let sv = rep.second_variation;
    assert!((sv - rep.second_variation_closed).abs() <= 1e-8 * sv.abs(), "{rep:?}");
    assert!(rep.mu1_residual <= 1e-12);
    assert!(rep.rayleigh_quotient <= rep.rayleigh_bound * (1.0 + 1e-3));
    // N = 4, p = q = 3: 4 vs (1 + 8/1)² is far from the threshold
    assert!(!rep.predicted);
    let c = comparison_check(&sp.u, &sp.v, &ep, 1e-12).unwrap();
    assert!(c.pass, "{c:?}");
    let dirs = szulkin_trials(&sp.u, 50, 1e-2, 11);
    assert!(szulkin_check(&sp.u, &wp, &ep, &dirs, 1e-8).unwrap().pass);
}

#[test]
fn hardy_two_dimensional_estimate_agrees_with_radial() {
    for (m, n) in [(2, 2), (3, 2)] {
        let g = build_grid(DomainSpec::new(m, n, 1.0, 129, 33)).unwrap();
        let grid_value = hardy_grid_estimate(&g, 1e-12).unwrap();
        let radial = hardy_truncated(g.dim(), 1.0, 10.0, 2e-3).unwrap();
        assert!((grid_value - radial).abs() <= 1e-2 * radial, "{grid_value} vs {radial}");
    }
}

#[test]
fn unequal_exponents_satisfy_comparison_and_rayleigh() {
    let ep = ExponentPair::new(4.0, 5.0).unwrap();
    let mut eps = Vec::new();
    for (nr, nt) in [(65, 33), (129, 65)] {
        let g = build_grid(DomainSpec::new(3, 2, 1.0, nr, nt)).unwrap();
        let wp = WeightPair::ones(g.clone());
        let sp = mountain_pass_solve(&g, &wp, &ep, &SolverOptions::default()).unwrap();
        assert!(sp.accepted);
        let c = comparison_check(&sp.u, &sp.v, &ep, 1e-12).unwrap();
        assert!(c.pass, "{c:?}");
        eps.push(c.relative_epsilon);
        let r = rayleigh_bound_check(&sp.u, &sp.v, &ep, 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
    }
    assert!(eps[1] <= eps[0].max(1e-12));
}

#[test]
fn continuation_is_identity_for_subcritical_target() {
    let g = build_grid(DomainSpec::new(2, 2, 1.0, 33, 17)).unwrap();
    let wp = WeightPair::ones(g.clone());
    let ep = ExponentPair::new(2.5, 2.5).unwrap();
    let opts = SolverOptions::default();
    let a = continuation_solve(&g, &wp, &ep, &opts).unwrap();
    let b = mountain_pass_solve(&g, &wp, &ep, &opts).unwrap();
    assert_eq!(a.u.values(), b.u.values());
}

#[test]
fn continuation_reaches_supercritical_target() {
    let g = build_grid(DomainSpec::new(3, 2, 1.0, 65, 33)).unwrap();
    let wp = WeightPair::ones(g.clone());
    let ep = ExponentPair::new(4.5, 4.5).unwrap();
    assert!(ep.is_supercritical(5) && ep.window_ok(2));
    let sp = continuation_solve(&g, &wp, &ep, &SolverOptions::default()).unwrap();
    assert!(sp.accepted);
    assert_eq!(sp.exponents, ep);
    assert!(sp.energy.total > 0.0);
}

#[test]
fn symmetry_breaking_outside_the_window() {
    let g = build_grid(DomainSpec::new(3, 2, 1.0, 65, 33)).unwrap();
    let wp = WeightPair::ones(g.clone());
    let ep = ExponentPair::new(7.0, 7.0).unwrap();
    assert!(!ep.window_ok(2));
    let hardy = hardy_constant(g.spec(), 2e-3).unwrap();
    let radial = mountain_pass_solve(&g, &wp, &ep, &radial_opts()).unwrap();
    let rep = spectral_report(&radial, hardy.value, 1e-12).unwrap();
    assert_eq!(rep.predicted, rep.criterion_lhs > rep.criterion_rhs);
    assert!(rep.predicted);
    let sp = mountain_pass_solve(&g, &wp, &ep, &SolverOptions::default()).unwrap();
    assert!(sp.accepted);
    let verdict = symmetry_verdict(&sp, &rep, 1e-3).unwrap();
    assert!(!verdict.is_discrepancy(), "{verdict:?}");
}

#[test]
fn sweep_gives_distinct_candidates() {
    let base = DomainSpec::new(4, 2, 1.0, 65, 33);
    let ep = ExponentPair::new(3.5, 3.5).unwrap();
    let weights = |g: &std::sync::Arc<hamsys::Grid>| Ok(WeightPair::ones(g.clone()));
    let out = multiplicity_sweep(&base, &ep, 3, &weights, &SolverOptions::default(), 2).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].decomposition, (4, 2));
    assert_eq!(out[1].decomposition, (3, 3));
    let a = out[0].result.as_ref().unwrap();
    let b = out[1].result.as_ref().unwrap();
    let d = distinctness_check(a, b, 1e-3).unwrap();
    assert_eq!(d.verdict, DistinctVerdict::Distinct, "{d:?}");

    // threads must not change the result
    let serial = multiplicity_sweep(&base, &ep, 3, &weights, &SolverOptions::default(), 1).unwrap();
    assert_eq!(serial[1].result.as_ref().unwrap().u.values(), b.u.values());
}
