//! Spectral side of the symmetry-breaking argument.
//!
//! * the Hardy constant `Λ_H = inf ∫|∇φ|² / ∫φ²/|x|²` of the exterior domain,
//! * the radial eigenproblem `-φ'' - (N-1)φ'/r + μφ/r² + φ = λ V φ` with
//!   `V = v^{(p-2)/2} u^{(q-2)/2}`,
//! * the angular mode `η = (m-n)/N - cos 2θ` with eigenvalue `2N`,
//! * the second variation of `I` along `φη` and the resulting criterion
//!   `(p-1)(q-1) > (1 + 2N/Λ_H)² q/p`.

use serde::{Deserialize, Serialize};

use crate::elliptic::{angular_eigenpairs, HelmholtzSystem, Preconditioner};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functional::{helmholtz_apply, inversion_map, ExponentPair, WeightPair};
use crate::geometry::{kappa, DomainSpec, Grid};
use crate::linalg::solve_tridiagonal;
use crate::solver::{radiality_measure, SolutionPair};

/// Truncation ratios `R_out / R` used for the Hardy extrapolation.
pub const HARDY_TRUNCATIONS: [f64; 3] = [10.0, 40.0, 160.0];

/// Angular exclusion near the axes when sampling the angular identity.
pub const ANGULAR_DELTA: f64 = 1e-3;

/// Classical lower bound `(N-2)²/4`.
pub fn hardy_lower_bound(dim: usize) -> f64 {
    let a = dim as f64 - 2.0;
    a * a / 4.0
}

/// Tridiagonal generalized problem `K x = λ M x` (both symmetric, `M` definite).
struct Tridiag {
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    m_diag: Vec<f64>,
    m_off: Vec<f64>,
}

fn sym_tri_mul(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += off[i] * x[i + 1];
            }
            s
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest eigenpair by inverse iteration with Rayleigh quotients.
fn smallest_tridiagonal(t: &Tridiag, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>, usize)> {
    let n = t.k_diag.len();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    lower[1..].copy_from_slice(&t.k_off);
    upper[..n - 1].copy_from_slice(&t.k_off);
    let mut x = vec![1.0; n];
    let mut lambda = f64::INFINITY;
    let mut last_change = f64::INFINITY;
    for it in 1..=max_iter {
        let mx = sym_tri_mul(&t.m_diag, &t.m_off, &x);
        let mut y = solve_tridiagonal(&lower, &t.k_diag, &upper, &mx);
        let my = sym_tri_mul(&t.m_diag, &t.m_off, &y);
        let norm = dot(&y, &my).sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        let ky = sym_tri_mul(&t.k_diag, &t.k_off, &y);
        let my = sym_tri_mul(&t.m_diag, &t.m_off, &y);
        let new = dot(&y, &ky) / dot(&y, &my);
        x = y;
        let change = (new - lambda).abs() / new.abs();
        // round-off can leave the quotient cycling just above `tol`
        let stalled = it > 100 && change <= 1e2 * tol && change >= 0.5 * last_change;
        if change <= tol || stalled {
            return Ok((new, x, it));
        }
        last_change = change;
        lambda = new;
    }
    Err(Error::NonConvergence {
        solver: "inverse iteration",
        iterations: max_iter,
        residual: lambda,
    })
}

/// P1 finite elements in `s = ln r` for `∫φ_s² e^{(N-2)s} / ∫φ² e^{(N-2)s}`
/// on `(ln R, ln R_out)`, Dirichlet at both ends.
fn hardy_fem(dim: usize, inner: f64, outer: f64, h: f64) -> Tridiag {
    let (s0, s1) = (inner.ln(), outer.ln());
    let elems = ((s1 - s0) / h).ceil() as usize;
    let h = (s1 - s0) / elems as f64;
    let c = dim as f64 - 2.0;
    // 3-point Gauss-Legendre on [0, 1]
    let gx = [0.5 - 0.5 * (0.6f64).sqrt(), 0.5, 0.5 + 0.5 * (0.6f64).sqrt()];
    let gw = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let n = elems - 1;
    let mut k_diag = vec![0.0; n];
    let mut k_off = vec![0.0; n.saturating_sub(1)];
    let mut m_diag = vec![0.0; n];
    let mut m_off = vec![0.0; n.saturating_sub(1)];
    for e in 0..elems {
        let sa = s0 + e as f64 * h;
        let (mut w0, mut w00, mut w01, mut w11) = (0.0, 0.0, 0.0, 0.0);
        for (x, w) in gx.iter().zip(gw) {
            let omega = w * (c * (sa + x * h)).exp();
            w0 += omega;
            w00 += omega * (1.0 - x) * (1.0 - x);
            w01 += omega * x * (1.0 - x);
            w11 += omega * x * x;
        }
        // element nodes e (left) and e+1 (right); unknown index = node - 1
        let kk = w0 / h;
        let (l, r) = (e as isize - 1, e as isize);
        if l >= 0 {
            let l = l as usize;
            k_diag[l] += kk;
            m_diag[l] += h * w00;
        }
        if (r as usize) < n {
            let r = r as usize;
            k_diag[r] += kk;
            m_diag[r] += h * w11;
        }
        if l >= 0 && (r as usize) < n {
            k_off[l as usize] -= kk;
            m_off[l as usize] += h * w01;
        }
    }
    Tridiag {
        k_diag,
        k_off,
        m_diag,
        m_off,
    }
}

/// Smallest radial Hardy quotient on the truncated shell `R < r < R_out`.
pub fn hardy_truncated(dim: usize, inner: f64, outer: f64, h: f64) -> Result<f64> {
    if dim < 3 || !(inner > 0.0 && outer > inner) {
        return Err(Error::InvalidDomain(format!(
            "need N >= 3 and 0 < R < R_out (N = {dim}, R = {inner}, R_out = {outer})"
        )));
    }
    // Richardson in the mesh width; the P1 error is O(h²)
    let coarse = smallest_tridiagonal(&hardy_fem(dim, inner, outer, h), 1e-13, 5000)?.0;
    let fine = smallest_tridiagonal(&hardy_fem(dim, inner, outer, h / 2.0), 1e-13, 5000)?.0;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyEstimate {
    /// Extrapolated infimum.
    pub value: f64,
    /// `(R_out / R, truncated value)` for each truncation.
    pub truncations: Vec<(f64, f64)>,
    pub lower_bound: f64,
    pub mesh_width: f64,
}

/// `Λ_H` for the exterior of the ball of radius `R` in `ℝ^N`.
///
/// Truncated values behave like `Λ + c / ln²(R_out/R)`; a quadratic fit in
/// `x = 1/ln²(R_out/R)` through the three truncations is evaluated at `x = 0`.
pub fn hardy_constant(spec: &DomainSpec, mesh_width: f64) -> Result<HardyEstimate> {
    let r = spec.inner_radius;
    let mut truncations = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ratio in HARDY_TRUNCATIONS {
        let val = hardy_truncated(spec.dim, r, ratio * r, mesh_width)?;
        truncations.push((ratio, val));
        xs.push(1.0 / ratio.ln().powi(2));
        ys.push(val);
    }
    // Lagrange interpolation at x = 0
    let mut value = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if i != j {
                l *= xs[j] / (xs[j] - xs[i]);
            }
        }
        value += l * ys[i];
    }
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            solver: "hardy extrapolation",
            iterations: 3,
            residual: value,
        });
    }
    Ok(HardyEstimate {
        value,
        truncations,
        lower_bound: hardy_lower_bound(spec.dim),
        mesh_width,
    })
}

/// Smallest eigenvalue of `-Δ_h φ = λ φ / r²` on the solver grid (Dirichlet at both radii).
pub fn hardy_grid_estimate(grid: &std::sync::Arc<Grid>, tol: f64) -> Result<f64> {
    let sys = HelmholtzSystem::new(grid.clone(), 0.0).with_preconditioner(Preconditioner::Separable);
    let ir2: Vec<f64> = {
        let nt = grid.n_theta();
        let mut out = vec![0.0; grid.len()];
        for (i, &w) in grid.inv_r2().iter().enumerate() {
            out[i * nt..(i + 1) * nt].iter_mut().for_each(|x| *x = w);
        }
        out
    };
    let weight = Field::from_values(grid.clone(), ir2)?;
    let mut x = Field::from_fn(grid.clone(), |r, _| {
        let (a, b) = (grid.spec().inner_radius, grid.spec().outer_radius);
        (r - a) * (b - r)
    });
    let mut lambda = f64::INFINITY;
    for _ in 0..2000 {
        let rhs = x.zip_map(&weight, |a, b| a * b)?;
        let (y, _) = sys.solve(&rhs, 1e-14)?;
        let mut ly = sys.apply(&y);
        ly.zero_boundary();
        let num = ly.inner(&y);
        let den = y.zip_map(&weight, |a, b| a * a * b)?.values().iter().zip(grid.mass()).map(|(a, m)| a * m).sum::<f64>();
        let new = num / den;
        x = y.scaled(1.0 / y.max_abs());
        if (new - lambda).abs() <= tol * new {
            return Ok(new);
        }
        lambda = new;
    }
    Err(Error::NonConvergence {
        solver: "hardy grid iteration",
        iterations: 2000,
        residual: lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEigen {
    pub lambda: f64,
    pub mu: f64,
    /// Eigenfunction per radius (zero on both radial boundaries), max-normalised.
    pub phi: Vec<f64>,
    pub iterations: usize,
}

/// `V = v̄^{(p-2)/2} ū^{(q-2)/2}` from the angular averages.
fn potential(u: &Field, v: &Field, ep: &ExponentPair) -> Result<Vec<f64>> {
    u.check_same_grid(v)?;
    let ub = u.radial_profile();
    let vb = v.radial_profile();
    Ok(ub
        .iter()
        .zip(&vb)
        .map(|(&a, &b)| b.max(0.0).powf(0.5 * (ep.p - 2.0)) * a.max(0.0).powf(0.5 * (ep.q - 2.0)))
        .collect())
}

/// First eigenpair of `-φ'' - (N-1)φ'/r + μφ/r² + φ = λVφ` using the solver's radial stencil.
pub fn radial_eigenpair_with_mu(
    u: &Field,
    v: &Field,
    ep: &ExponentPair,
    mu: f64,
    tol: f64,
) -> Result<RadialEigen> {
    let grid = u.grid();
    let pot = potential(u, v, ep)?;
    let n = grid.n_r() - 2;
    let interior = &pot[1..grid.n_r() - 1];
    if interior.iter().all(|&x| x <= 0.0) {
        return Err(Error::UndefinedEigenproblem("the potential vanishes identically".into()));
    }
    let (rp, rm) = grid.radial_stencil();
    let ir2 = grid.inv_r2();
    let w: Vec<f64> = (1..=n)
        .map(|i| grid.radii()[i].powi(grid.dim() as i32 - 1))
        .collect();
    // symmetric form: multiply rows by r_i^{N-1}
    let mut k_diag = vec![0.0; n];
    let mut k_off = vec![0.0; n.saturating_sub(1)];
    for a in 0..n {
        let i = a + 1;
        k_diag[a] = w[a] * (rp[i] + rm[i] + mu * ir2[i] + 1.0);
        if a + 1 < n {
            k_off[a] = -w[a] * rp[i];
        }
    }
    let m_diag: Vec<f64> = (0..n).map(|a| w[a] * interior[a]).collect();
    let t = Tridiag {
        k_diag,
        k_off,
        m_diag,
        m_off: vec![0.0; n.saturating_sub(1)],
    };
    let (lambda, x, iterations) = smallest_tridiagonal(&t, tol, 20_000)?;
    let scale = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let mut phi = vec![0.0; grid.n_r()];
    for a in 0..n {
        phi[a + 1] = x[a] / scale;
    }
    Ok(RadialEigen {
        lambda,
        mu,
        phi,
        iterations,
    })
}

/// Radial eigenpair with the angular eigenvalue `μ₁ = 2N`.
pub fn radial_eigenpair(u: &Field, v: &Field, ep: &ExponentPair, tol: f64) -> Result<RadialEigen> {
    let mu = 2.0 * u.grid().dim() as f64;
    radial_eigenpair_with_mu(u, v, ep, mu, tol)
}

/// `η(θ) = (m-n)/N - cos 2θ`.
pub fn angular_mode(theta: f64, m: usize, n: usize) -> f64 {
    (m as f64 - n as f64) / (m + n) as f64 - (2.0 * theta).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularCheck {
    pub mu: f64,
    /// `max |-η'' + κη' - 2Nη|` over the samples.
    pub max_residual: f64,
    /// `max(|η'(0)|, |η'(π/2)|)`.
    pub endpoint_derivative: f64,
    pub samples: usize,
}

/// Checks `-η'' + κ(θ) η' = 2N η` with exact derivatives `η' = 2 sin 2θ`, `η'' = 4 cos 2θ`.
pub fn angular_eigen_check(m: usize, n: usize, n_samples: usize) -> Result<AngularCheck> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidDomain(format!("need m, n >= 2, got ({m}, {n})")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mu = 2.0 * (m + n) as f64;
    let (a, b) = (ANGULAR_DELTA, std::f64::consts::FRAC_PI_2 - ANGULAR_DELTA);
    let mut max_residual = 0.0f64;
    for k in 0..n_samples {
        let t = a + (b - a) * k as f64 / (n_samples - 1) as f64;
        let d1 = 2.0 * (2.0 * t).sin();
        let d2 = 4.0 * (2.0 * t).cos();
        let res = -d2 + kappa(t, m, n)? * d1 - mu * angular_mode(t, m, n);
        max_residual = max_residual.max(res.abs());
    }
    let endpoint_derivative = (2.0 * (0.0f64).sin()).abs().max((2.0 * std::f64::consts::PI.sin()).abs());
    Ok(AngularCheck {
        mu,
        max_residual,
        endpoint_derivative,
        samples: n_samples,
    })
}

/// Second angular eigenpair of the discrete angular operator on `grid`
/// (the first is the constant with eigenvalue 0). The vector is scaled like `η`:
/// `η_h(π/2) - η_h(0) = 2`.
pub fn discrete_angular_mode(grid: &Grid) -> (f64, Vec<f64>) {
    let pairs = angular_eigenpairs(grid);
    let (mu, v) = pairs[1].clone();
    let span = v[v.len() - 1] - v[0];
    (mu, v.iter().map(|x| 2.0 * x / span).collect())
}

/// General form `(p'-1) ∫ |-Δu+u|^{p'-2} (-Δw+w)² / a^{p'-1} - (q-1) ∫ b |u|^{q-2} w²`.
pub fn second_variation(u: &Field, w: &Field, wp: &WeightPair, ep: &ExponentPair) -> Result<f64> {
    u.check_same_grid(w)?;
    let pc = ep.p_conj();
    let lu = helmholtz_apply(u);
    let lw = helmholtz_apply(w);
    let grid = u.grid();
    let mass = grid.mass();
    let (a, b) = (wp.a.values(), wp.b.values());
    let mut total = 0.0;
    for k in 0..grid.len() {
        if mass[k] == 0.0 {
            continue;
        }
        let lwk = lw.values()[k];
        if lwk != 0.0 {
            total += mass[k] * (pc - 1.0) * lu.values()[k].abs().powf(pc - 2.0) * lwk * lwk
                / a[k].powf(pc - 1.0);
        }
        total -= mass[k] * (ep.q - 1.0) * b[k] * u.values()[k].abs().powf(ep.q - 2.0) * w.values()[k].powi(2);
    }
    Ok(total)
}

/// Closed form `((p'-1) λ² - (q-1)) ∫ |u|^{q-2} w²`, valid for `a ≡ b ≡ 1`, radial `u`
/// and `w = φ η` with `(λ, φ)` the radial eigenpair for the angular eigenvalue of `η`.
pub fn second_variation_closed(u: &Field, w: &Field, lambda: f64, ep: &ExponentPair) -> Result<f64> {
    u.check_same_grid(w)?;
    let grid = u.grid();
    let integral: f64 = grid
        .mass()
        .iter()
        .zip(u.values())
        .zip(w.values())
        .map(|((m, &x), &y)| m * x.abs().powf(ep.q - 2.0) * y * y)
        .sum();
    Ok(((ep.p_conj() - 1.0) * lambda * lambda - (ep.q - 1.0)) * integral)
}

/// `φ(r) η(θ)` as a field.
pub fn tensor_field(grid: &std::sync::Arc<Grid>, phi: &[f64], eta: &[f64]) -> Result<Field> {
    let mut vals = Vec::with_capacity(grid.len());
    for &f in phi {
        for &e in eta {
            vals.push(f * e);
        }
    }
    Field::from_values(grid.clone(), vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `min (q v^p - p u^q)` over interior nodes.
    pub min_margin: f64,
    /// `max(0, -min_margin)`.
    pub epsilon: f64,
    /// `max (q v^p, p u^q)`, for scale.
    pub scale: f64,
    /// `epsilon / scale`.
    pub relative_epsilon: f64,
    /// Relative to `scale`.
    pub tol: f64,
    pub pass: bool,
}

/// Pointwise comparison `q v^p ≥ p u^q`.
pub fn comparison_check(u: &Field, v: &Field, ep: &ExponentPair, tol: f64) -> Result<ComparisonReport> {
    u.check_same_grid(v)?;
    let grid = u.grid();
    let nt = grid.n_theta();
    let (mut min_margin, mut scale) = (f64::INFINITY, 0.0f64);
    for k in nt..(grid.n_r() - 1) * nt {
        let lhs = ep.q * v.values()[k].max(0.0).powf(ep.p);
        let rhs = ep.p * u.values()[k].max(0.0).powf(ep.q);
        min_margin = min_margin.min(lhs - rhs);
        scale = scale.max(lhs).max(rhs);
    }
    let epsilon = (-min_margin).max(0.0);
    let relative_epsilon = if scale > 0.0 { epsilon / scale } else { 0.0 };
    Ok(ComparisonReport {
        min_margin,
        epsilon,
        scale,
        relative_epsilon,
        tol,
        pass: relative_epsilon <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    pub quotient: f64,
    pub bound: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `(∫|∇v|² + v²) / ∫ v² v^{(p-2)/2} u^{(q-2)/2}` against `√(q/p)`.
pub fn rayleigh_bound_check(u: &Field, v: &Field, ep: &ExponentPair, tol: f64) -> Result<RayleighReport> {
    u.check_same_grid(v)?;
    let lv = helmholtz_apply(v);
    let num = lv.inner(v);
    let den: f64 = u
        .grid()
        .mass()
        .iter()
        .zip(u.values())
        .zip(v.values())
        .map(|((m, &a), &b)| m * b.max(0.0).powf(0.5 * (ep.p + 2.0)) * a.max(0.0).powf(0.5 * (ep.q - 2.0)))
        .sum();
    if !(den > 0.0) {
        return Err(Error::UndefinedEigenproblem("zero denominator in the Rayleigh quotient".into()));
    }
    let quotient = num / den;
    let bound = (ep.q / ep.p).sqrt();
    Ok(RayleighReport {
        quotient,
        bound,
        tol,
        pass: quotient <= bound * (1.0 + tol),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    /// `(p-1)(q-1)`.
    pub lhs: f64,
    /// `(1 + 2N/Λ_H)² q/p`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn symmetry_criterion(dim: usize, ep: &ExponentPair, hardy: f64) -> Criterion {
    let lhs = (ep.p - 1.0) * (ep.q - 1.0);
    let rhs = (1.0 + 2.0 * dim as f64 / hardy).powi(2) * ep.q / ep.p;
    Criterion {
        lhs,
        rhs,
        holds: lhs > rhs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryVerdict {
    PredictedObserved,
    PredictedNotObserved,
    NotPredictedObserved,
    NotPredictedNotObserved,
}

impl SymmetryVerdict {
    pub fn new(predicted: bool, observed: bool) -> Self {
        match (predicted, observed) {
            (true, true) => Self::PredictedObserved,
            (true, false) => Self::PredictedNotObserved,
            (false, true) => Self::NotPredictedObserved,
            (false, false) => Self::NotPredictedNotObserved,
        }
    }

    pub fn predicted(self) -> bool {
        matches!(self, Self::PredictedObserved | Self::PredictedNotObserved)
    }

    /// Only "predicted but radial" contradicts the theory.
    pub fn is_discrepancy(self) -> bool {
        self == Self::PredictedNotObserved
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub hardy_constant: f64,
    pub lambda1: f64,
    pub phi: Vec<f64>,
    pub mu1_residual: f64,
    pub criterion_lhs: f64,
    pub criterion_rhs: f64,
    pub predicted: bool,
    /// Discrete angular eigenvalue used for the second-variation test field.
    pub mu_h: f64,
    /// `λ₁` for `μ = μ_h`.
    pub lambda1_h: f64,
    /// General form at `w = φ_h η_h`.
    pub second_variation: f64,
    /// Closed form at the same `w`.
    pub second_variation_closed: f64,
    pub rayleigh_quotient: f64,
    pub rayleigh_bound: f64,
}

/// Spectral quantities at a radial candidate `u` (with `a ≡ b ≡ 1`).
///
/// `v` is recomputed as `inversion_map(u)` so the closed form of the second variation
/// holds exactly on the grid.
pub fn spectral_report(
    radial: &SolutionPair,
    hardy: f64,
    tol: f64,
) -> Result<SpectralReport> {
    let u = &radial.u;
    let grid = u.grid();
    let ep = radial.exponents;
    let wp = WeightPair::ones(grid.clone());
    let v = inversion_map(u, &wp, &ep)?;
    let eig = radial_eigenpair(u, &v, &ep, tol)?;
    let angular = angular_eigen_check(grid.m(), grid.n(), 1001)?;
    let crit = symmetry_criterion(grid.dim(), &ep, hardy);
    let (mu_h, eta_h) = discrete_angular_mode(grid);
    let eig_h = radial_eigenpair_with_mu(u, &v, &ep, mu_h, tol)?;
    let w = tensor_field(grid, &eig_h.phi, &eta_h)?;
    let second = second_variation(u, &w, &wp, &ep)?;
    let closed = second_variation_closed(u, &w, eig_h.lambda, &ep)?;
    let ray = rayleigh_bound_check(&radial.u, &radial.v, &ep, 1e-3)?;
    Ok(SpectralReport {
        hardy_constant: hardy,
        lambda1: eig.lambda,
        phi: eig.phi,
        mu1_residual: angular.max_residual,
        criterion_lhs: crit.lhs,
        criterion_rhs: crit.rhs,
        predicted: crit.holds,
        mu_h,
        lambda1_h: eig_h.lambda,
        second_variation: second,
        second_variation_closed: closed,
        rayleigh_quotient: ray.quotient,
        rayleigh_bound: ray.bound,
    })
}

/// Four-way verdict from the criterion and the observed radiality of `sp.u`.
pub fn symmetry_verdict(sp: &SolutionPair, report: &SpectralReport, tol: f64) -> Result<SymmetryVerdict> {
    let observed = radiality_measure(&sp.u)? > tol;
    Ok(SymmetryVerdict::new(report.predicted, observed))
}
