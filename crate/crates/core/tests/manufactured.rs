//! Manufactured solution `u* = (r-R)(R_out-r) e^{-r} cos²θ` for `-Δu + u = f`.

use std::sync::Arc;
use std::time::Instant;

use hamsys::elliptic::{assemble, helmholtz_solve};
use hamsys::{build_grid, DomainSpec, Field, Grid};

fn exact_and_rhs(grid: &Arc<Grid>) -> (Field, Field) {
    let spec = grid.spec();
    let (r0, r1) = (spec.inner_radius, spec.outer_radius);
    let (m, n, dim) = (spec.m as f64, spec.n as f64, spec.dim as f64);
    let profile = move |r: f64| {
        let p = (r - r0) * (r1 - r);
        let dp = r0 + r1 - 2.0 * r;
        let e = (-r).exp();
        (p * e, (dp - p) * e, (-2.0 - 2.0 * dp + p) * e)
    };
    let exact = Field::from_fn(grid.clone(), |r, t| profile(r).0 * t.cos().powi(2));
    let rhs = Field::from_fn(grid.clone(), |r, t| {
        let (f, f1, f2) = profile(r);
        let c = (2.0 * t).cos();
        let g = (1.0 + c) / 2.0;
        // Laplace-Beltrami part of cos²θ on the (m, n) sphere
        let lb = (m - n) - dim * c;
        let lap = (f2 + (dim - 1.0) / r * f1) * g + f / (r * r) * lb;
        f * g - lap
    });
    (exact, rhs)
}

fn max_error(levels: &[usize], m: usize, n: usize) -> Vec<(f64, f64)> {
    levels
        .iter()
        .map(|&k| {
            let grid = build_grid(DomainSpec::new(m, n, 1.0, k, k)).unwrap();
            let sys = assemble(&grid);
            let (exact, rhs) = exact_and_rhs(&grid);
            let start = Instant::now();
            let u = helmholtz_solve(&sys, &rhs, 1e-12).unwrap();
            let secs = start.elapsed().as_secs_f64();
            let err = u.axpy(-1.0, &exact).unwrap().max_abs() / exact.max_abs();
            (err, secs)
        })
        .collect()
}

#[test]
fn second_order_convergence() {
    for (m, n) in [(2, 2), (3, 2), (3, 3), (4, 2), (5, 3)] {
        let res = max_error(&[33, 65, 129], m, n);
        for w in res.windows(2) {
            let order = (w[0].0 / w[1].0).log2();
            assert!(order >= 1.9, "({m},{n}) order {order}: {res:?}");
        }
        assert!(res.iter().all(|&(_, s)| s < 30.0));
    }
}

