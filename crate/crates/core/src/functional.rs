//! Reduction by inversion.
//!
//! Eliminating `v = |-Δu+u|^{p'-1} a^{-(p'-1)}` from the first equation leaves a single
//! fourth-order problem for `u` with energy
//!
//! ```text
//! I(u) = Ψ(u) - Φ(u),   Ψ(u) = 1/p' ∫ |-Δu+u|^{p'} / a^{p'-1},   Φ(u) = 1/q ∫ b |u|^q.
//! ```
//!
//! All integrals use the lumped mass of the grid, and `-Δ+1` is the same stencil the
//! elliptic solver inverts, so the discrete gradient is the exact adjoint chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::cone_project;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::Grid;

/// Exponents `q ≥ p > 2` of the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidExponents(format!("non-finite p = {p}, q = {q}")));
        }
        if p <= 2.0 {
            return Err(Error::InvalidExponents(format!("p = {p} must exceed 2")));
        }
        if q < p {
            return Err(Error::InvalidExponents(format!("q = {q} must be >= p = {p}")));
        }
        Ok(Self { p, q })
    }

    /// `p' = p / (p - 1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_conj(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// `1/p + 1/q`.
    pub fn reciprocal_sum(&self) -> f64 {
        1.0 / self.p + 1.0 / self.q
    }

    /// Above the critical hyperbola: `1/p + 1/q < 1 - 2/N`.
    pub fn is_supercritical(&self, dim: usize) -> bool {
        self.reciprocal_sum() < 1.0 - 2.0 / dim as f64
    }

    /// Whether `n > (p+1)/(p-1)`, the case where a lower bound on `1/p + 1/q` is needed.
    pub fn needs_lower_bound(&self, n: usize) -> bool {
        n as f64 > (self.p + 1.0) / (self.p - 1.0)
    }

    /// Existence window for the decomposition with second block dimension `n`:
    /// either `n ≤ (p+1)/(p-1)`, or `1/p + 1/q > 1 - 2/(n+1)`.
    pub fn window_ok(&self, n: usize) -> bool {
        !self.needs_lower_bound(n) || self.reciprocal_sum() > 1.0 - 2.0 / (n as f64 + 1.0)
    }

    pub fn classify(&self, dim: usize, n: usize) -> ExponentFlags {
        ExponentFlags {
            p_conj: self.p_conj(),
            q_conj: self.q_conj(),
            reciprocal_sum: self.reciprocal_sum(),
            critical_hyperbola: 1.0 - 2.0 / dim as f64,
            supercritical: self.is_supercritical(dim),
            window_ok: self.window_ok(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFlags {
    pub p_conj: f64,
    pub q_conj: f64,
    pub reciprocal_sum: f64,
    pub critical_hyperbola: f64,
    pub supercritical: bool,
    pub window_ok: bool,
}

/// Weights `a(s,t)`, `b(s,t)` sampled on the grid with their lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    pub a: Field,
    pub b: Field,
    pub a0: f64,
    pub b0: f64,
}

impl WeightPair {
    pub fn new(a: Field, b: Field) -> Result<Self> {
        a.check_same_grid(&b)?;
        let a0 = a.min();
        let b0 = b.min();
        Ok(Self { a, b, a0, b0 })
    }

    pub fn ones(grid: std::sync::Arc<Grid>) -> Self {
        let one = Field::constant(grid, 1.0);
        Self {
            a: one.clone(),
            b: one,
            a0: 1.0,
            b0: 1.0,
        }
    }

    pub fn from_st(
        grid: std::sync::Arc<Grid>,
        a: impl Fn(f64, f64) -> f64,
        b: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self::new(Field::from_st(grid.clone(), a), Field::from_st(grid, b)).expect("same grid")
    }

    pub fn is_unit(&self) -> bool {
        self.a.values().iter().all(|&x| x == 1.0) && self.b.values().iter().all(|&x| x == 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub min_a: f64,
    pub min_b: f64,
    pub max_a: f64,
    pub max_b: f64,
    /// Largest discrete `a_θ` (equivalently `s a_t - t a_s`) over the grid.
    pub max_a_theta: f64,
    pub max_b_theta: f64,
    pub tol: f64,
    pub pass: bool,
}

fn max_theta_slope(f: &Field) -> f64 {
    let g = f.grid();
    let k = g.h_theta();
    f.values()
        .chunks(g.n_theta())
        .flat_map(|row| row.windows(2).map(move |p| (p[1] - p[0]) / k))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Positivity, boundedness and the monotonicity condition `s w_t - t w_s ≤ 0`.
pub fn validate_weights(wp: &WeightPair, tol: f64) -> WeightReport {
    let min_a = wp.a.min();
    let min_b = wp.b.min();
    let max_a = wp.a.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_b = wp.b.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_a_theta = max_theta_slope(&wp.a);
    let max_b_theta = max_theta_slope(&wp.b);
    let pass = wp.a0 > 0.0
        && wp.b0 > 0.0
        && min_a >= wp.a0
        && min_b >= wp.b0
        && max_a.is_finite()
        && max_b.is_finite()
        && max_a_theta <= tol
        && max_b_theta <= tol;
    WeightReport {
        min_a,
        min_b,
        max_a,
        max_b,
        max_a_theta,
        max_b_theta,
        tol,
        pass,
    }
}

/// Nodal `-Δu + u` (the Dirichlet rows return `u`).
pub fn helmholtz_apply(u: &Field) -> Field {
    let grid = u.grid();
    let mut lap = vec![0.0; grid.len()];
    grid.apply_laplacian(u.values(), &mut lap);
    let vals = u.values().iter().zip(&lap).map(|(x, l)| x - l).collect();
    Field::from_values(grid.clone(), vals).expect("same grid")
}

/// `v = |-Δu + u|^{p'-1} a^{-(p'-1)}`, zero on the Dirichlet rows.
pub fn inversion_map(u: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<Field> {
    let e = ep.p_conj() - 1.0;
    let lu = helmholtz_apply(u);
    let mut v = lu.zip_map(&wp.a, |x, a| (x.abs() / a).powf(e))?;
    v.zero_boundary();
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub psi: f64,
    pub phi: f64,
    pub total: f64,
}

/// `p' Ψ(u) = ∫ |-Δu+u|^{p'} / a^{p'-1}` and `q Φ(u) = ∫ b|u|^q`.
pub fn energy_terms(u: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<(f64, f64)> {
    u.check_same_grid(&wp.a)?;
    let pc = ep.p_conj();
    let lu = helmholtz_apply(u);
    let grid = u.grid();
    let mass = grid.mass();
    let (a, b) = (wp.a.values(), wp.b.values());
    let mut psi = 0.0;
    let mut phi = 0.0;
    for k in 0..grid.len() {
        if mass[k] == 0.0 {
            continue;
        }
        psi += mass[k] * lu.values()[k].abs().powf(pc) / a[k].powf(pc - 1.0);
        phi += mass[k] * b[k] * u.values()[k].abs().powf(ep.q);
    }
    Ok((psi, phi))
}

pub fn energy(u: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<Energy> {
    let (a, b) = energy_terms(u, wp, ep)?;
    let psi = a / ep.p_conj();
    let phi = b / ep.q;
    Ok(Energy {
        psi,
        phi,
        total: psi - phi,
    })
}

/// Regularisation used for `|x|^{p'-2} x` inside the gradient only.
pub const GRADIENT_EPS: f64 = 1e-12;

/// `σ = |-Δu+u|^{p'-2}(-Δu+u) / a^{p'-1}` (regularised), zero on Dirichlet rows.
pub fn psi_dual(u: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<Field> {
    let pc = ep.p_conj();
    let lu = helmholtz_apply(u);
    let mut s = lu.zip_map(&wp.a, |x, a| {
        (x * x + GRADIENT_EPS * GRADIENT_EPS).powf(0.5 * (pc - 2.0)) * x / a.powf(pc - 1.0)
    })?;
    s.zero_boundary();
    Ok(s)
}

/// Gradient of `I` in the mass inner product:
/// `G = (-Δ+1) σ - b |u|^{q-2} u`, zero on the Dirichlet rows.
pub fn energy_gradient(u: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<Field> {
    let sigma = psi_dual(u, wp, ep)?;
    let ls = helmholtz_apply(&sigma);
    let q = ep.q;
    u.check_same_grid(&ls)?;
    let mut g = ls;
    for ((gv, &x), &b) in g.values_mut().iter_mut().zip(u.values()).zip(wp.b.values()) {
        *gv -= b * x.abs().powf(q - 2.0) * x;
    }
    g.zero_boundary();
    Ok(g)
}

/// `t* > 0` maximising `t ↦ I(t u)`: `t* = (p'Ψ(u) / qΦ(u))^{1/(q-p')}`.
pub fn nehari_scale(u: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<f64> {
    let (a, b) = energy_terms(u, wp, ep)?;
    if !(b > 0.0) {
        return Err(Error::DegenerateDirection(
            "the Φ-term vanishes along this direction".into(),
        ));
    }
    if !(a > 0.0) {
        return Err(Error::DegenerateDirection(
            "the Ψ-term vanishes along this direction".into(),
        ));
    }
    Ok((a / b).powf(1.0 / (ep.q - ep.p_conj())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzulkinReport {
    pub min_slack: f64,
    pub trials: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Slack `⟨DΦ(u), u - v⟩ + Ψ(v) - Ψ(u)` of the variational inequality at one trial `v`.
pub fn szulkin_slack(u: &Field, v: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<f64> {
    let grid = u.grid();
    let q = ep.q;
    let dphi: Vec<f64> = u
        .values()
        .iter()
        .zip(wp.b.values())
        .map(|(&x, &b)| b * x.abs().powf(q - 2.0) * x)
        .collect();
    let diff = u.axpy(-1.0, v)?;
    let pairing = grid.inner(&dphi, diff.values());
    let (psi_v, _) = energy_terms(v, wp, ep)?;
    let (psi_u, _) = energy_terms(u, wp, ep)?;
    Ok(pairing + (psi_v - psi_u) / ep.p_conj())
}

/// Minimum slack over the trial set; passes iff it is at least `-tol`.
pub fn szulkin_check(
    u: &Field,
    wp: &WeightPair,
    ep: &ExponentPair,
    directions: &[Field],
    tol: f64,
) -> Result<SzulkinReport> {
    let mut min_slack = f64::INFINITY;
    for v in directions {
        min_slack = min_slack.min(szulkin_slack(u, v, wp, ep)?);
    }
    if directions.is_empty() {
        min_slack = 0.0;
    }
    Ok(SzulkinReport {
        min_slack,
        trials: directions.len(),
        tol,
        pass: min_slack >= -tol,
    })
}

/// Seeded cone trials `cone_project(u + ε ‖u‖_∞ ξ)` with smooth random `ξ`
/// built from low radial/angular modes vanishing at both radii.
pub fn szulkin_trials(u: &Field, count: usize, relative_size: f64, seed: u64) -> Vec<Field> {
    let grid = u.grid().clone();
    let (r0, r1) = (grid.spec().inner_radius, grid.spec().outer_radius);
    let scale = relative_size * u.max_abs().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coeffs: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xi = Field::from_fn(grid.clone(), |r, t| {
                let x = (r - r0) / (r1 - r0);
                let mut s = 0.0;
                for a in 0..4 {
                    for b in 0..3 {
                        s += coeffs[a * 3 + b]
                            * (std::f64::consts::PI * (a + 1) as f64 * x).sin()
                            * (2.0 * b as f64 * t).cos();
                    }
                }
                s
            });
            let mut v = cone_project(&u.axpy(scale, &xi).expect("same grid"));
            v.zero_boundary();
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        build_grid(DomainSpec::new(3, 2, 1.0, 17, 13).with_outer_radius(3.0)).unwrap()
    }

    fn bump(g: &Arc<Grid>) -> Field {
        Field::from_fn(g.clone(), |r, t| (r - 1.0) * (3.0 - r) * (1.0 + 0.5 * (2.0 * t).cos()))
    }

    #[test]
    fn exponent_validation_and_flags() {
        assert!(ExponentPair::new(2.0, 3.0).is_err());
        assert!(ExponentPair::new(3.0, 2.5).is_err());
        let ep = ExponentPair::new(3.0, 3.0).unwrap();
        assert_relative_eq!(ep.p_conj(), 1.5);
        assert_relative_eq!(1.0 / ep.p + 1.0 / ep.p_conj(), 1.0);
        // p = q = 3.2, N = 5: 1/p + 1/q = 0.625 > 0.6, below the hyperbola
        let ep = ExponentPair::new(3.2, 3.2).unwrap();
        assert!(!ep.is_supercritical(5));
        assert!(ep.window_ok(2));
        let ep = ExponentPair::new(4.5, 4.5).unwrap();
        assert!(ep.is_supercritical(5));
        assert!(ep.window_ok(2));
        // n = 3 needs 1/p + 1/q > 1/2 once n > (p+1)/(p-1)
        let ep = ExponentPair::new(5.0, 5.0).unwrap();
        assert!(ep.needs_lower_bound(3));
        assert!(!ep.window_ok(3));
        // small p: no lower bound needed
        let ep = ExponentPair::new(2.5, 20.0).unwrap();
        assert!(!ep.needs_lower_bound(2));
        assert!(ep.window_ok(2));
    }

    #[test]
    fn weight_presets() {
        let g = grid();
        assert!(validate_weights(&WeightPair::ones(g.clone()), 1e-12).pass);
        let s2 = WeightPair::from_st(g.clone(), |s, _| 1.0 + s * s, |s, _| 2.0 + 0.5 * s * s);
        assert!(validate_weights(&s2, 1e-12).pass);
        let t2 = WeightPair::from_st(g, |_, t| 1.0 + t * t, |_, _| 1.0);
        let rep = validate_weights(&t2, 1e-12);
        assert!(!rep.pass);
        assert!(rep.max_a_theta > 0.0);
    }

    #[test]
    fn inversion_examples() {
        let g = grid();
        let ep = ExponentPair::new(3.0, 3.0).unwrap();
        let u = bump(&g);
        let lu = helmholtz_apply(&u);
        let wp4 = WeightPair::new(Field::constant(g.clone(), 4.0), Field::constant(g.clone(), 1.0))
            .unwrap();
        let v = inversion_map(&u, &wp4, &ep).unwrap();
        for i in 1..g.n_r() - 1 {
            for j in 0..g.n_theta() {
                let expect = lu.at(i, j).abs().sqrt() / 2.0;
                assert_relative_eq!(v.at(i, j), expect, max_relative = 1e-14);
            }
        }
        let wp = WeightPair::ones(g.clone());
        let v1 = inversion_map(&u, &wp, &ep).unwrap();
        let v2 = inversion_map(&u.scaled(2.0), &wp, &ep).unwrap();
        for (a, b) in v1.values().iter().zip(v2.values()) {
            assert_relative_eq!(b, &(a * 2f64.powf(0.5)), max_relative = 1e-13, epsilon = 1e-300);
        }
    }

    #[test]
    fn energy_scaling_law() {
        let g = grid();
        let ep = ExponentPair::new(2.5, 3.5).unwrap();
        let wp = WeightPair::ones(g.clone());
        let u = bump(&g);
        let (a, b) = energy_terms(&u, &wp, &ep).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let e = energy(&u.scaled(t), &wp, &ep).unwrap().total;
            let expect = t.powf(ep.p_conj()) / ep.p_conj() * a - t.powf(ep.q) / ep.q * b;
            assert_relative_eq!(e, expect, max_relative = 1e-12);
        }
        assert_eq!(energy(&Field::zeros(g), &wp, &ep).unwrap().total, 0.0);
    }

    #[test]
    fn nehari_scale_properties() {
        let g = grid();
        let ep = ExponentPair::new(3.0, 4.0).unwrap();
        let wp = WeightPair::ones(g.clone());
        let u = bump(&g);
        let t = nehari_scale(&u, &wp, &ep).unwrap();
        assert_relative_eq!(nehari_scale(&u.scaled(3.0), &wp, &ep).unwrap(), t / 3.0, max_relative = 1e-12);
        assert_relative_eq!(nehari_scale(&u.scaled(t), &wp, &ep).unwrap(), 1.0, max_relative = 1e-12);
        // grid search oracle on a log grid around t*
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in -400..=400 {
            let s = t * 10f64.powf(k as f64 / 400.0);
            let e = energy(&u.scaled(s), &wp, &ep).unwrap().total;
            if e > best.0 {
                best = (e, s);
            }
        }
        assert!((best.1 / t - 1.0).abs() < 6e-3);
        assert!(nehari_scale(&Field::zeros(g), &wp, &ep).is_err());
    }

    #[test]
    fn szulkin_basics() {
        let g = grid();
        let ep = ExponentPair::new(3.0, 3.0).unwrap();
        let wp = WeightPair::ones(g.clone());
        let u = bump(&g);
        assert_eq!(szulkin_slack(&u, &u, &wp, &ep).unwrap(), 0.0);
        let zero = Field::zeros(g.clone());
        let v = cone_project(&u);
        let slack = szulkin_slack(&zero, &v, &wp, &ep).unwrap();
        assert_relative_eq!(slack, energy(&v, &wp, &ep).unwrap().psi, max_relative = 1e-14);
        assert!(slack >= 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let g = grid();
        let ep = ExponentPair::new(3.0, 3.5).unwrap();
        let wp = WeightPair::from_st(g.clone(), |s, _| 1.0 + 0.1 * s * s, |_, _| 1.5);
        let u = bump(&g);
        let grad = energy_gradient(&u, &wp, &ep).unwrap();
        for d in [
            Field::from_fn(g.clone(), |r, t| (r - 1.0) * (3.0 - r) * t.cos()),
            Field::from_fn(g.clone(), |r, t| ((r - 1.0) * (3.0 - r)).powi(2) * (3.0 * t).sin()),
        ]
        .iter()
        {
            let h = 1e-5;
            let ep_ = |t: f64| energy(&u.axpy(t, d).unwrap(), &wp, &ep).unwrap().total;
            let fd = (ep_(h) - ep_(-h)) / (2.0 * h);
            let an = grad.inner(d);
            assert_relative_eq!(an, fd, max_relative = 1e-6, epsilon = 1e-10);
        }
    }
}
