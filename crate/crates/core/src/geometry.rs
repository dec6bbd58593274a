//! Truncated exterior domain in reduced `(r, θ)` coordinates.
//!
//! A function on `A_R ⊂ ℝ^N` that is invariant under `O(m) × O(n)` depends only on
//! `s = |x_{1..m}|` and `t = |x_{m+1..N}|`, or in polar form on `r = |x|` and
//! `θ = atan(t / s) ∈ [0, π/2]`. The volume element becomes
//! `ω_{m-1} ω_{n-1} r^{N-1} cos^{m-1}θ sin^{n-1}θ dθ dr`.
//!
//! Two weight sets live on a [`Grid`]:
//!
//! * `weights` is the tensor trapezoid rule for that measure and backs [`Grid::integrate`].
//!   It vanishes on the axis rows `θ = 0, π/2`.
//! * `mass` is the control-volume mass (exact angular cell integrals of the density)
//!   that makes the discrete Laplacian self-adjoint. It is positive on the axis rows
//!   and zero on the Dirichlet rows `r = R, R_out`. Every variational quantity
//!   (energies, gradients, weighted norms) uses it.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Total dimension `N = m + n`.
    pub dim: usize,
    pub m: usize,
    pub n: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl DomainSpec {
    /// Spec with the default truncation `R_out = 10 R`.
    pub fn new(m: usize, n: usize, inner_radius: f64, n_r: usize, n_theta: usize) -> Self {
        Self {
            dim: m + n,
            m,
            n,
            inner_radius,
            outer_radius: 10.0 * inner_radius,
            n_r,
            n_theta,
        }
    }

    pub fn with_outer_radius(mut self, outer_radius: f64) -> Self {
        self.outer_radius = outer_radius;
        self
    }

    pub fn with_resolution(mut self, n_r: usize, n_theta: usize) -> Self {
        self.n_r = n_r;
        self.n_theta = n_theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidDomain(msg));
        if self.dim != self.m + self.n {
            return fail(format!("N = {} must equal m + n = {}", self.dim, self.m + self.n));
        }
        if self.n <= 1 {
            return fail(format!("n = {} must be > 1", self.n));
        }
        if self.n > self.m {
            return fail(format!("n = {} must be <= m = {}", self.n, self.m));
        }
        if self.dim <= 3 {
            return fail(format!("N = {} must be > 3", self.dim));
        }
        if !(self.inner_radius > 0.0 && self.inner_radius.is_finite()) {
            return fail(format!("inner radius R = {} must be > 0", self.inner_radius));
        }
        if !(self.outer_radius > self.inner_radius && self.outer_radius.is_finite()) {
            return fail(format!(
                "outer radius R_out = {} must exceed R = {}",
                self.outer_radius, self.inner_radius
            ));
        }
        if self.n_r < 3 {
            return fail(format!("n_r = {} must be >= 3", self.n_r));
        }
        if self.n_theta < 3 {
            return fail(format!("n_theta = {} must be >= 3", self.n_theta));
        }
        Ok(())
    }
}

/// Surface area of the unit sphere `S^{k-1} ⊂ ℝ^k`.
pub fn sphere_area(k: usize) -> f64 {
    assert!(k >= 1, "sphere dimension must be positive");
    // |S^0| = 2, |S^1| = 2π, |S^{k+1}| = 2π/k |S^{k-1}|
    let mut area = if k % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut j = if k % 2 == 1 { 1 } else { 2 };
    while j < k {
        area *= 2.0 * PI / j as f64;
        j += 2;
    }
    area
}

/// `κ(θ) = (m-1) tan θ - (n-1) / tan θ`, the drift of the reduced angular operator.
pub fn kappa(theta: f64, m: usize, n: usize) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::SingularAngle(theta));
    }
    let t = theta.tan();
    Ok((m as f64 - 1.0) * t - (n as f64 - 1.0) / t)
}

/// `∫_a^b cos^{m-1}θ sin^{n-1}θ dθ` by 5-point Gauss-Legendre (cells are small).
fn density_integral(a: f64, b: f64, m: usize, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    X.iter()
        .zip(W)
        .map(|(x, w)| w * angular_density(c + h * x, m, n))
        .sum::<f64>()
        * h
}

/// Angular density `cos^{m-1}θ sin^{n-1}θ`.
pub fn angular_density(theta: f64, m: usize, n: usize) -> f64 {
    theta.cos().powi(m as i32 - 1) * theta.sin().powi(n as i32 - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: DomainSpec,
    radii: Vec<f64>,
    angles: Vec<f64>,
    h_r: f64,
    h_theta: f64,
    omega_m: f64,
    omega_n: f64,
    weights: Vec<f64>,
    mass: Vec<f64>,
    theta_mass: Vec<f64>,
    rad_plus: Vec<f64>,
    rad_minus: Vec<f64>,
    inv_r2: Vec<f64>,
    ang_plus: Vec<f64>,
    ang_minus: Vec<f64>,
}

/// Uniform grid in `r` and `θ` with trapezoid weights and the matching FV stencil.
pub fn build_grid(spec: DomainSpec) -> Result<Arc<Grid>> {
    Grid::new(spec).map(Arc::new)
}

impl Grid {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        spec.validate()?;
        let DomainSpec {
            dim,
            m,
            n,
            inner_radius,
            outer_radius,
            n_r,
            n_theta,
        } = spec;
        let h_r = (outer_radius - inner_radius) / (n_r - 1) as f64;
        let h_theta = FRAC_PI_2 / (n_theta - 1) as f64;
        let mut radii: Vec<f64> = (0..n_r).map(|i| inner_radius + i as f64 * h_r).collect();
        radii[n_r - 1] = outer_radius;
        let mut angles: Vec<f64> = (0..n_theta).map(|j| j as f64 * h_theta).collect();
        angles[n_theta - 1] = FRAC_PI_2;

        let omega_m = sphere_area(m);
        let omega_n = sphere_area(n);
        let surface = omega_m * omega_n;
        let e = dim as i32 - 1;
        let last_j = n_theta - 1;
        let last_i = n_r - 1;

        let density: Vec<f64> = angles.iter().map(|&t| angular_density(t, m, n)).collect();
        let half = |j: usize| angular_density(angles[j] + 0.5 * h_theta, m, n);

        // angular FV stencil: control volume V_j = ∫ g over [θ_j - k/2, θ_j + k/2] ∩ [0, π/2],
        // face weights g_{j±1/2}; on the axes this tends to n u_θθ (θ=0) and m u_θθ (θ=π/2)
        let mut ang_plus = vec![0.0; n_theta];
        let mut ang_minus = vec![0.0; n_theta];
        let mut theta_mass = vec![0.0; n_theta];
        for j in 0..n_theta {
            let lo = (angles[j] - 0.5 * h_theta).max(0.0);
            let hi = (angles[j] + 0.5 * h_theta).min(FRAC_PI_2);
            theta_mass[j] = density_integral(lo, hi, m, n);
            if j < last_j {
                ang_plus[j] = half(j) / (h_theta * theta_mass[j]);
            }
            if j > 0 {
                ang_minus[j] = half(j - 1) / (h_theta * theta_mass[j]);
            }
        }

        let mut rad_plus = vec![0.0; n_r];
        let mut rad_minus = vec![0.0; n_r];
        let inv_r2: Vec<f64> = radii.iter().map(|r| 1.0 / (r * r)).collect();
        let h2 = h_r * h_r;
        for i in 1..last_i {
            let ri = radii[i].powi(e);
            rad_plus[i] = (radii[i] + 0.5 * h_r).powi(e) / (ri * h2);
            rad_minus[i] = (radii[i] - 0.5 * h_r).powi(e) / (ri * h2);
        }

        let mut weights = vec![0.0; n_r * n_theta];
        let mut mass = vec![0.0; n_r * n_theta];
        for i in 0..n_r {
            let cr = if i == 0 || i == last_i { 0.5 } else { 1.0 };
            let wr = surface * radii[i].powi(e) * h_r;
            for j in 0..n_theta {
                // the density vanishes on both axes since m, n ≥ 2
                if j != 0 && j != last_j {
                    weights[i * n_theta + j] = wr * cr * h_theta * density[j];
                }
                if i != 0 && i != last_i {
                    mass[i * n_theta + j] = wr * theta_mass[j];
                }
            }
        }

        Ok(Self {
            spec,
            radii,
            angles,
            h_r,
            h_theta,
            omega_m,
            omega_n,
            weights,
            mass,
            theta_mass,
            rad_plus,
            rad_minus,
            inv_r2,
            ang_plus,
            ang_minus,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.dim
    }
    pub fn m(&self) -> usize {
        self.spec.m
    }
    pub fn n(&self) -> usize {
        self.spec.n
    }
    pub fn n_r(&self) -> usize {
        self.spec.n_r
    }
    pub fn n_theta(&self) -> usize {
        self.spec.n_theta
    }
    pub fn len(&self) -> usize {
        self.spec.n_r * self.spec.n_theta
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
    pub fn h_r(&self) -> f64 {
        self.h_r
    }
    pub fn h_theta(&self) -> f64 {
        self.h_theta
    }
    /// `(ω_{m-1}, ω_{n-1})`.
    pub fn surface_constants(&self) -> (f64, f64) {
        (self.omega_m, self.omega_n)
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
    /// Per-row angular mass (positive everywhere, axis rows included).
    pub fn theta_mass(&self) -> &[f64] {
        &self.theta_mass
    }
    /// Radial stencil coefficients `(c⁺_i, c⁻_i)`; zero on the Dirichlet rows.
    pub fn radial_stencil(&self) -> (&[f64], &[f64]) {
        (&self.rad_plus, &self.rad_minus)
    }
    /// Angular stencil coefficients `(c⁺_j, c⁻_j)` including the axis closure.
    pub fn angular_stencil(&self) -> (&[f64], &[f64]) {
        (&self.ang_plus, &self.ang_minus)
    }
    pub fn inv_r2(&self) -> &[f64] {
        &self.inv_r2
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.spec.n_theta + j
    }

    pub fn is_interior_row(&self, i: usize) -> bool {
        i != 0 && i + 1 != self.spec.n_r
    }

    /// Volume of the truncated shell `R < |x| < R_out`.
    pub fn shell_volume(&self) -> f64 {
        let nd = self.spec.dim as i32;
        sphere_area(self.spec.dim)
            * (self.spec.outer_radius.powi(nd) - self.spec.inner_radius.powi(nd))
            / self.spec.dim as f64
    }

    /// Trapezoid quadrature `Σ u_ij w_ij`.
    pub fn integrate(&self, u: &Field) -> f64 {
        assert_eq!(u.len(), self.len(), "field does not match grid");
        u.values().iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Mass-weighted integral `Σ u_ij M_ij`.
    pub fn mass_integral(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass).map(|(a, w)| a * w).sum()
    }

    /// Mass-weighted inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.mass)
            .map(|((x, y), w)| x * y * w)
            .sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// Discrete Laplacian applied to raw nodal values; zero on the Dirichlet rows.
    pub fn apply_laplacian(&self, u: &[f64], out: &mut [f64]) {
        let nt = self.spec.n_theta;
        let nr = self.spec.n_r;
        out[..nt].iter_mut().for_each(|x| *x = 0.0);
        out[(nr - 1) * nt..].iter_mut().for_each(|x| *x = 0.0);
        for i in 1..nr - 1 {
            let (cp, cm, ir2) = (self.rad_plus[i], self.rad_minus[i], self.inv_r2[i]);
            let row = i * nt;
            for j in 0..nt {
                let c = u[row + j];
                let mut acc = cp * (u[row + nt + j] - c) - cm * (c - u[row - nt + j]);
                let mut ang = 0.0;
                if j + 1 < nt {
                    ang += self.ang_plus[j] * (u[row + j + 1] - c);
                }
                if j > 0 {
                    ang -= self.ang_minus[j] * (c - u[row + j - 1]);
                }
                acc += ir2 * ang;
                out[row + j] = acc;
            }
        }
    }
}

/// Second-order approximation of `Δu` at interior radial rows, zero on `r = R, R_out`.
///
/// Uses the conservative form `r^{1-N}(r^{N-1}u_r)_r + r^{-2} g^{-1}(g u_θ)_θ` with
/// `g = cos^{m-1}θ sin^{n-1}θ`, which equals `u_rr + (N-1)u_r/r + (u_θθ - κ u_θ)/r²`.
/// On the axis rows the angular part is replaced by its limit `n u_θθ` (θ = 0) or
/// `m u_θθ` (θ = π/2) with a reflection stencil.
pub fn laplacian_polar(u: &Field) -> Field {
    let grid = u.grid();
    let mut out = vec![0.0; grid.len()];
    grid.apply_laplacian(u.values(), &mut out);
    Field::from_values(grid.clone(), out).expect("same grid")
}

/// Trapezoid quadrature of an invariant function over the truncated shell.
pub fn integrate(u: &Field) -> f64 {
    u.grid().integrate(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(n_r: usize, n_theta: usize) -> DomainSpec {
        DomainSpec::new(2, 2, 1.0, n_r, n_theta).with_outer_radius(2.0)
    }

    #[test]
    fn smallest_grid_is_uniform() {
        let g = Grid::new(spec(3, 3)).unwrap();
        assert_eq!(g.radii(), &[1.0, 1.5, 2.0]);
        assert_relative_eq!(g.angles()[1], PI / 4.0);
        assert_eq!(g.angles()[2], FRAC_PI_2);
    }

    #[test]
    fn axis_weights_vanish() {
        let g = Grid::new(spec(9, 9)).unwrap();
        for i in 0..g.n_r() {
            assert_eq!(g.weights()[g.index(i, 0)], 0.0);
            assert_eq!(g.weights()[g.index(i, 8)], 0.0);
        }
        assert!(g.weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Grid::new(spec(2, 3)).is_err());
        assert!(Grid::new(spec(3, 2)).is_err());
        assert!(Grid::new(spec(3, 3).with_outer_radius(1.0)).is_err());
        assert!(Grid::new(DomainSpec::new(2, 3, 1.0, 5, 5)).is_err());
        assert!(Grid::new(DomainSpec::new(2, 1, 1.0, 5, 5)).is_err());
        let mut s = spec(5, 5);
        s.dim = 5;
        assert!(Grid::new(s).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0);
        assert_relative_eq!(sphere_area(2), 2.0 * PI);
        assert_relative_eq!(sphere_area(3), 4.0 * PI);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0);
    }

    #[test]
    fn kappa_values() {
        assert_relative_eq!(kappa(PI / 4.0, 3, 2).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(kappa(PI / 4.0, 4, 4).unwrap(), 0.0, epsilon = 1e-14);
        let s3 = 3f64.sqrt();
        assert_relative_eq!(kappa(PI / 3.0, 3, 2).unwrap(), 2.0 * s3 - 1.0 / s3, epsilon = 1e-13);
        assert!(matches!(kappa(0.0, 3, 2), Err(Error::SingularAngle(_))));
        assert!(matches!(kappa(FRAC_PI_2, 3, 2), Err(Error::SingularAngle(_))));
    }

    #[test]
    fn stencil_is_symmetric_in_mass() {
        let g = Grid::new(DomainSpec::new(3, 2, 1.0, 7, 9)).unwrap();
        let (ap, am) = g.angular_stencil();
        let tm = g.theta_mass();
        for j in 0..g.n_theta() - 1 {
            assert_relative_eq!(tm[j] * ap[j], tm[j + 1] * am[j + 1], max_relative = 1e-13);
        }
        let (rp, rm) = g.radial_stencil();
        let e = g.dim() as i32 - 1;
        for i in 1..g.n_r() - 2 {
            let wi = g.radii()[i].powi(e);
            let wn = g.radii()[i + 1].powi(e);
            assert_relative_eq!(wi * rp[i], wn * rm[i + 1], max_relative = 1e-13);
        }
    }
}
