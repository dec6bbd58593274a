//! Solution pairs of the coupled system.
//!
//! Pipeline: seeded guesses in the cone, a mountain-pass stage on `I`, Newton on the
//! two-field residual, and optional continuation in `(p, q)`.
//!
//! The mountain-pass stage deforms ray paths `t ↦ t u`, `t ∈ [0, 2t*]`. Along such a
//! path the maximum sits at `t*` (see [`nehari_scale`]) and equals
//! `(1/p' - 1/q) (A^{1/p'} / B^{1/q})^{p'q/(q-p')}` with `A = p'Ψ(u)`, `B = qΦ(u)`.
//! Lowering the path maximum is therefore the same as lowering
//! `F(u) = ln A / p' - ln B / q`, which is what the descent does.

use std::sync::Arc;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::cone::{cone_membership, cone_project, ConeReport};
use crate::elliptic::{pointwise_invariance_step, HelmholtzSystem, Preconditioner};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::functional::{
    energy, energy_terms, helmholtz_apply, inversion_map, nehari_scale, psi_dual, Energy,
    ExponentPair, WeightPair,
};
use crate::geometry::{DomainSpec, Grid};
use crate::linalg::gmres;

/// Relative tolerance for the inner Helmholtz solves.
const SOLVE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative residual required of both equations.
    pub accept_tol: f64,
    /// Stop the descent once the preconditioned decrement falls below this.
    pub descent_tol: f64,
    pub descent_max_iter: usize,
    pub newton_max_iter: usize,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
    pub path_points: usize,
    /// Angular tilt exponents `c` of the seeds `f(r) cos^{2c}θ`; `0` is the radial seed.
    pub tilts: Vec<f64>,
    /// Keep every iterate radial (θ-average after each step).
    pub radial_only: bool,
    /// Homotopy steps used by [`continuation_solve`].
    pub continuation_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            accept_tol: 1e-8,
            descent_tol: 1e-7,
            descent_max_iter: 600,
            newton_max_iter: 40,
            gmres_restart: 80,
            gmres_max_iter: 800,
            path_points: 33,
            tilts: vec![0.0, 1.0, 4.0],
            radial_only: false,
            continuation_steps: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLog {
    pub tilt: f64,
    pub path_max: f64,
    pub iterations: usize,
    pub decrement: f64,
    /// Energy of the Newton-refined candidate, `NaN` if refinement failed.
    pub refined_energy: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentLog {
    pub candidates: Vec<CandidateLog>,
    pub chosen: usize,
    /// `I(t u)` at the path nodes `t_i = 2 t* i / (points - 1)`.
    pub path_energies: Vec<f64>,
    pub path_max_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub u: Field,
    pub v: Field,
    /// `‖-Δu + u - a v^{p-1}‖ / ‖a v^{p-1}‖` in the mass norm.
    pub residual_u: f64,
    /// `‖-Δv + v - b u^{q-1}‖ / ‖b u^{q-1}‖` in the mass norm.
    pub residual_v: f64,
    pub energy: Energy,
    pub cone: ConeReport,
    /// Minimum of `u` and `v` over the interior rows.
    pub positivity_margin: f64,
    pub decomposition: (usize, usize),
    pub exponents: ExponentPair,
    /// `‖inversion_map(u) - v‖ / ‖v‖`.
    pub roundtrip_error: f64,
    /// Cone report of one pointwise invariance step applied to `u`.
    pub invariance_cone: ConeReport,
    pub newton_iterations: usize,
    /// Newton residual history (relative, two-field).
    pub newton_history: Vec<f64>,
    pub descent: Option<DescentLog>,
    pub accepted: bool,
}

impl SolutionPair {
    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}

struct Context<'a> {
    sys: HelmholtzSystem,
    wp: &'a WeightPair,
    ep: ExponentPair,
}

impl<'a> Context<'a> {
    fn new(grid: &Arc<Grid>, wp: &'a WeightPair, ep: ExponentPair) -> Result<Self> {
        if !crate::field::same_grid(grid, wp.a.grid()) {
            return Err(Error::IncompatibleGrids);
        }
        let sys = HelmholtzSystem::new(grid.clone(), 1.0).with_preconditioner(Preconditioner::Separable);
        Ok(Self { sys, wp, ep })
    }

    fn grid(&self) -> &Arc<Grid> {
        self.sys.grid()
    }

    fn solve(&self, f: &Field) -> Result<Field> {
        self.sys.solve(f, SOLVE_TOL).map(|(u, _)| u)
    }

    /// `L^{-1}(w |x|^{e-1} sgn x)`.
    fn power_solve(&self, x: &Field, w: &Field, e: f64) -> Result<Field> {
        let rhs = x.zip_map(w, |x, w| w * x.abs().powf(e - 2.0) * x)?;
        self.solve(&rhs)
    }

    fn log_quotient(&self, u: &Field) -> Result<f64> {
        let (a, b) = energy_terms(u, self.wp, &self.ep)?;
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::DegenerateDirection("vanishing energy term".into()));
        }
        Ok(a.ln() / self.ep.p_conj() - b.ln() / self.ep.q)
    }
}

fn rel_norm(diff: &Field, reference: &Field) -> f64 {
    let d = diff.norm();
    let r = reference.norm();
    if r == 0.0 {
        d
    } else {
        d / r
    }
}

/// Radial seed profile vanishing on both radii, decaying like `e^{-r}`.
pub fn seed_field(grid: &Arc<Grid>, tilt: f64) -> Field {
    let (r0, r1) = (grid.spec().inner_radius, grid.spec().outer_radius);
    let mut u = Field::from_fn(grid.clone(), |r, t| {
        let f = (r - r0) * (r1 - r) * (-(r - r0)).exp();
        f * t.cos().powi(2).powf(tilt)
    });
    u.zero_boundary();
    u
}

struct Descent {
    u: Field,
    iterations: usize,
    decrement: f64,
}

fn project(u: &Field, radial_only: bool) -> Field {
    let mut out = if radial_only { u.radial_average() } else { u.clone() };
    out = cone_project(&out);
    out.zero_boundary();
    out
}

/// Preconditioned projected descent on `F = ln A / p' - ln B / q` over the cone.
fn descend(ctx: &Context, u0: Field, opts: &SolverOptions) -> Result<Descent> {
    let ep = ctx.ep;
    let pc = ep.p_conj();
    let mut u = project(&u0, opts.radial_only);
    let mut f = ctx.log_quotient(&u)?;
    let mut alpha: f64 = 1.0;
    let mut decrement = f64::INFINITY;
    let mut it = 0;
    while it < opts.descent_max_iter {
        let (a_term, b_term) = energy_terms(&u, ctx.wp, &ep)?;
        let sigma = psi_dual(&u, ctx.wp, &ep)?;
        let l_sigma = helmholtz_apply(&sigma);
        let mut g = l_sigma.zip_map(&u, |ls, _| ls / a_term)?;
        for ((gv, &x), &b) in g.values_mut().iter_mut().zip(u.values()).zip(ctx.wp.b.values()) {
            *gv -= b * x.abs().powf(ep.q - 2.0) * x / b_term;
        }
        g.zero_boundary();
        // inverse of the Ψ-Hessian in w = Lu: A L^{-1} P L^{-1}
        let w = helmholtz_apply(&u);
        let w_max = w.max_abs();
        let z = ctx.solve(&g)?;
        let mut pz = z.clone();
        for ((pv, &wv), &a) in pz.values_mut().iter_mut().zip(w.values()).zip(ctx.wp.a.values()) {
            let scale = (wv.abs() + 1e-10 * w_max).powf(2.0 - pc) * a.powf(pc - 1.0) / (pc - 1.0);
            *pv *= -a_term * scale;
        }
        let d = ctx.solve(&pz)?;
        decrement = -g.inner(&d);
        if !(decrement > 0.0) || decrement < opts.descent_tol {
            decrement = decrement.max(0.0);
            break;
        }
        alpha = (2.0 * alpha).min(1.0);
        let mut accepted = false;
        for _ in 0..40 {
            let trial = project(&u.axpy(alpha, &d)?, opts.radial_only);
            if let Ok(ft) = ctx.log_quotient(&trial) {
                if ft <= f - 1e-4 * alpha * decrement {
                    // keep the iterate on the Nehari ray for a stable scale
                    let t = nehari_scale(&trial, ctx.wp, &ep)?;
                    u = trial.scaled(t);
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        it += 1;
        if !accepted {
            debug!("descent line search stalled at iteration {it}, decrement {decrement:e}");
            break;
        }
    }
    let t = nehari_scale(&u, ctx.wp, &ep)?;
    Ok(Descent {
        u: u.scaled(t),
        iterations: it,
        decrement,
    })
}

fn path_energies(ctx: &Context, u: &Field, points: usize) -> Result<(Vec<f64>, usize)> {
    let t_star = nehari_scale(u, ctx.wp, &ctx.ep)?;
    let last = points.max(3) - 1;
    let mut out = Vec::with_capacity(last + 1);
    for i in 0..=last {
        let t = 2.0 * t_star * i as f64 / last as f64;
        out.push(energy(&u.scaled(t), ctx.wp, &ctx.ep)?.total);
    }
    let idx = out
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc })
        .0;
    Ok((out, idx))
}

/// Two-field residual map in `v`: `v - L^{-1}(b u^{q-1})` with `u = L^{-1}(a v^{p-1})`.
fn fixed_point_residual(ctx: &Context, v: &Field) -> Result<(Field, Field)> {
    let u = ctx.power_solve(v, &ctx.wp.a, ctx.ep.p)?;
    let tv = ctx.power_solve(&u, &ctx.wp.b, ctx.ep.q)?;
    Ok((v.axpy(-1.0, &tv)?, u))
}

struct NewtonOutcome {
    v: Field,
    history: Vec<f64>,
    converged: bool,
}

/// Damped Newton on `v - L^{-1}(b (L^{-1}(a v^{p-1}))^{q-1}) = 0` with GMRES inner solves.
fn newton(ctx: &Context, v0: Field, opts: &SolverOptions) -> Result<NewtonOutcome> {
    let ep = ctx.ep;
    let grid = ctx.grid().clone();
    let target = 0.1 * opts.accept_tol;
    let mut v = v0;
    let (mut res, mut u) = fixed_point_residual(ctx, &v)?;
    let mut rel = rel_norm(&res, &v);
    let mut history = vec![rel];
    for _ in 0..opts.newton_max_iter {
        if rel <= target {
            return Ok(NewtonOutcome {
                v,
                history,
                converged: true,
            });
        }
        let da: Vec<f64> = v
            .values()
            .iter()
            .zip(ctx.wp.a.values())
            .map(|(&x, &a)| a * (ep.p - 1.0) * x.abs().powf(ep.p - 2.0))
            .collect();
        let db: Vec<f64> = u
            .values()
            .iter()
            .zip(ctx.wp.b.values())
            .map(|(&x, &b)| b * (ep.q - 1.0) * x.abs().powf(ep.q - 2.0))
            .collect();
        let sys = &ctx.sys;
        let mut apply = |x: &[f64], y: &mut [f64]| -> Result<()> {
            let r1: Vec<f64> = x.iter().zip(sys.restrict(&da)).map(|(a, b)| a * b).collect();
            let (s1, _) = sys.solve_interior(&r1, None, SOLVE_TOL)?;
            let r2: Vec<f64> = s1.iter().zip(sys.restrict(&db)).map(|(a, b)| a * b).collect();
            let (s2, _) = sys.solve_interior(&r2, None, SOLVE_TOL)?;
            y.iter_mut()
                .zip(x)
                .zip(&s2)
                .for_each(|((yv, xv), sv)| *yv = xv - sv);
            Ok(())
        };
        let rhs: Vec<f64> = sys.restrict(res.values()).iter().map(|x| -x).collect();
        let inner_tol = (1e-2 * rel).clamp(1e-13, 1e-4);
        let (step, stats) = gmres(
            &mut apply,
            &rhs,
            sys.interior_mass(),
            inner_tol,
            opts.gmres_restart,
            opts.gmres_max_iter,
        )?;
        let step = Field::from_values(grid.clone(), sys.extend(&step))?;
        debug!("newton: residual {rel:e}, gmres {} iterations", stats.iterations);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = v.axpy(lambda, &step)?;
            let (res_t, u_t) = fixed_point_residual(ctx, &trial)?;
            let rel_t = rel_norm(&res_t, &trial);
            if rel_t.is_finite() && rel_t < (1.0 - 1e-4 * lambda) * rel {
                v = trial;
                res = res_t;
                u = u_t;
                rel = rel_t;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        history.push(rel);
        if !accepted {
            break;
        }
    }
    Ok(NewtonOutcome {
        converged: rel <= target,
        v,
        history,
    })
}

fn finalize(
    ctx: &Context,
    v_newton: &Field,
    history: Vec<f64>,
    opts: &SolverOptions,
    descent: Option<DescentLog>,
) -> Result<SolutionPair> {
    let u = ctx.power_solve(v_newton, &ctx.wp.a, ctx.ep.p)?;
    let v = ctx.power_solve(&u, &ctx.wp.b, ctx.ep.q)?;
    assess(ctx, u, v, history, opts, descent)
}

fn assess(
    ctx: &Context,
    u: Field,
    v: Field,
    history: Vec<f64>,
    opts: &SolverOptions,
    descent: Option<DescentLog>,
) -> Result<SolutionPair> {
    let ep = ctx.ep;
    let grid = ctx.grid();
    let f_u = v.zip_map(&ctx.wp.a, |x, a| a * x.abs().powf(ep.p - 2.0) * x)?;
    let f_v = u.zip_map(&ctx.wp.b, |x, b| b * x.abs().powf(ep.q - 2.0) * x)?;
    let mut r_u = helmholtz_apply(&u).axpy(-1.0, &f_u)?;
    let mut r_v = helmholtz_apply(&v).axpy(-1.0, &f_v)?;
    r_u.zero_boundary();
    r_v.zero_boundary();
    let residual_u = rel_norm(&r_u, &f_u);
    let residual_v = rel_norm(&r_v, &f_v);
    let energy = energy(&u, ctx.wp, &ep)?;
    let scale = u.max_abs();
    let cone = cone_membership(&u, opts.accept_tol * scale);
    let positivity_margin = u.interior_min().min(v.interior_min());
    let roundtrip_error = rel_norm(&inversion_map(&u, ctx.wp, &ep)?.axpy(-1.0, &v)?, &v);
    let inv = pointwise_invariance_step(&ctx.sys, &u, &ctx.wp.b, ep.q, SOLVE_TOL)?;
    let invariance_cone = cone_membership(&inv.v, opts.accept_tol * inv.v.max_abs());
    let accepted = residual_u <= opts.accept_tol
        && residual_v <= opts.accept_tol
        && cone.member
        && positivity_margin > 0.0
        && energy.total > 0.0;
    if !accepted {
        warn!(
            "solution fails acceptance: residuals ({residual_u:e}, {residual_v:e}), cone violation {:e}, \
             positivity {positivity_margin:e}, energy {:e}",
            cone.violation(),
            energy.total
        );
    }
    Ok(SolutionPair {
        u,
        v,
        residual_u,
        residual_v,
        energy,
        cone,
        positivity_margin,
        decomposition: (grid.m(), grid.n()),
        exponents: ep,
        roundtrip_error,
        invariance_cone,
        newton_iterations: history.len().saturating_sub(1),
        newton_history: history,
        descent,
        accepted,
    })
}

fn refine_from_u(
    ctx: &Context,
    u: &Field,
    opts: &SolverOptions,
    descent: Option<DescentLog>,
) -> Result<SolutionPair> {
    let v0 = ctx.power_solve(u, &ctx.wp.b, ctx.ep.q)?;
    refine_from_v(ctx, v0, opts, descent)
}

fn refine_from_v(
    ctx: &Context,
    v0: Field,
    opts: &SolverOptions,
    descent: Option<DescentLog>,
) -> Result<SolutionPair> {
    let out = newton(ctx, v0, opts)?;
    let rel = *out.history.last().unwrap_or(&f64::INFINITY);
    let pair = finalize(ctx, &out.v, out.history, opts, descent)?;
    if !out.converged {
        warn!("newton stalled at relative residual {rel:e}");
        return Err(Error::Unconverged {
            residual: rel,
            best: Box::new(pair),
        });
    }
    Ok(pair)
}

fn check_inputs(grid: &Arc<Grid>, ep: &ExponentPair) {
    if !ep.window_ok(grid.n()) {
        warn!(
            "exponents p = {}, q = {} lie outside the existence window for n = {}; running anyway",
            ep.p,
            ep.q,
            grid.n()
        );
    }
}

/// Mountain-pass search in the cone followed by Newton refinement.
pub fn mountain_pass_solve(
    grid: &Arc<Grid>,
    wp: &WeightPair,
    ep: &ExponentPair,
    opts: &SolverOptions,
) -> Result<SolutionPair> {
    check_inputs(grid, ep);
    let ctx = Context::new(grid, wp, *ep)?;
    if opts.tilts.is_empty() {
        return Err(Error::InvalidArgument("no seeds configured".into()));
    }
    // Every seed is descended and then Newton-refined, so candidates are
    // compared on converged critical points instead of on descent iterates.
    let mut refined: Vec<(f64, bool, usize, SolutionPair)> = Vec::new();
    let mut candidates = Vec::new();
    for &tilt in &opts.tilts {
        let seed = seed_field(grid, if opts.radial_only { 0.0 } else { tilt });
        let d = descend(&ctx, seed, opts)?;
        if d.u.max_abs() == 0.0 {
            continue;
        }
        let (path, _) = path_energies(&ctx, &d.u, opts.path_points)?;
        let path_max = path.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pair = match refine_from_u(&ctx, &d.u, opts, None) {
            Ok(p) => Some(p),
            Err(Error::Unconverged { best, .. }) => Some(*best),
            Err(e) => {
                warn!("refinement of tilt {tilt} failed: {e}");
                None
            }
        };
        let (energy, accepted) = pair
            .as_ref()
            .map_or((f64::NAN, false), |p| (p.energy.total, p.accepted));
        info!(
            "mountain-pass candidate tilt {tilt}: path max {path_max:.12e}, refined energy {energy:.12e}, accepted {accepted}"
        );
        let index = candidates.len();
        candidates.push(CandidateLog {
            tilt,
            path_max,
            iterations: d.iterations,
            decrement: d.decrement,
            refined_energy: energy,
            accepted,
        });
        if let Some(p) = pair {
            refined.push((if energy.is_finite() { energy } else { path_max }, accepted, index, p));
        }
        if opts.radial_only {
            break;
        }
    }
    // accepted candidates first, then lowest energy
    let chosen = (0..refined.len())
        .min_by(|&i, &j| {
            let (ei, ai, ..) = &refined[i];
            let (ej, aj, ..) = &refined[j];
            aj.cmp(ai).then(ei.total_cmp(ej))
        })
        .ok_or_else(|| Error::NoSolution("every path collapsed to zero".into()))?;
    let (_, accepted, chosen, mut pair) = refined.swap_remove(chosen);
    if !(pair.u.max_abs() > 0.0) {
        return Err(Error::NoSolution("mountain-pass point collapsed to zero".into()));
    }
    let (path_energies, path_max_index) = path_energies(&ctx, &pair.u, opts.path_points)?;
    pair.descent = Some(DescentLog {
        candidates,
        chosen,
        path_energies,
        path_max_index,
    });
    if !accepted {
        let residual = pair.residual_u.max(pair.residual_v);
        return Err(Error::Unconverged {
            residual,
            best: Box::new(pair),
        });
    }
    Ok(pair)
}

/// Residuals and acceptance checks of a given pair, without any iteration.
pub fn evaluate_pair(
    u: &Field,
    v: &Field,
    wp: &WeightPair,
    ep: &ExponentPair,
    opts: &SolverOptions,
) -> Result<SolutionPair> {
    u.check_same_grid(v)?;
    let ctx = Context::new(u.grid(), wp, *ep)?;
    assess(&ctx, u.clone(), v.clone(), Vec::new(), opts, None)
}

/// Newton on the two-field residual, starting from an existing pair.
pub fn coupled_refine(
    seed: &SolutionPair,
    wp: &WeightPair,
    ep: &ExponentPair,
    opts: &SolverOptions,
) -> Result<SolutionPair> {
    if !(seed.residual_u.is_finite() && seed.residual_v.is_finite()) {
        return Err(Error::InvalidArgument("seed residuals are not finite".into()));
    }
    let ctx = Context::new(seed.grid(), wp, *ep)?;
    refine_from_v(&ctx, seed.v.clone(), opts, seed.descent.clone())
}

/// Subcritical starting pair used by [`continuation_solve`] for a supercritical target.
pub fn continuation_start(dim: usize, target: &ExponentPair) -> ExponentPair {
    if !target.is_supercritical(dim) {
        return *target;
    }
    let p0 = (2.0 * dim as f64 - 2.0) / (dim as f64 - 2.0);
    ExponentPair { p: p0, q: p0 }
}

/// Homotopy in `(p, q)` from a subcritical pair to `target`, refining at each step.
pub fn continuation_solve(
    grid: &Arc<Grid>,
    wp: &WeightPair,
    target: &ExponentPair,
    opts: &SolverOptions,
) -> Result<SolutionPair> {
    check_inputs(grid, target);
    let start = continuation_start(grid.dim(), target);
    let mut pair = mountain_pass_solve(grid, wp, &start, opts)?;
    if start == *target {
        return Ok(pair);
    }
    let steps = opts.continuation_steps.max(1);
    let min_step = 1.0 / (64.0 * steps as f64);
    let mut tau = 0.0;
    let mut dtau = 1.0 / steps as f64;
    let descent = pair.descent.clone();
    while tau < 1.0 {
        let next = (tau + dtau).min(1.0);
        let ep = ExponentPair::new(
            start.p + next * (target.p - start.p),
            start.q + next * (target.q - start.q),
        )?;
        let ctx = Context::new(grid, wp, ep)?;
        let t = nehari_scale(&pair.u, wp, &ep)?;
        let attempt = refine_from_u(&ctx, &pair.u.scaled(t), opts, descent.clone());
        match attempt {
            Ok(p) if p.accepted => {
                info!("continuation reached p = {}, q = {}", ep.p, ep.q);
                pair = p;
                tau = next;
            }
            _ => {
                dtau *= 0.5;
                warn!("continuation step to p = {}, q = {} failed; halving", ep.p, ep.q);
                if dtau < min_step {
                    return Err(Error::StepUnderflow {
                        p: pair.exponents.p,
                        q: pair.exponents.q,
                    });
                }
            }
        }
    }
    Ok(pair)
}

/// Outcome of one decomposition in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub decomposition: (usize, usize),
    pub result: std::result::Result<SolutionPair, Error>,
}

/// One solve per decomposition `(N - n, n)`, `n = 2..=k`.
///
/// `weights` samples the weight pair on each decomposition's grid. With `threads > 1`
/// the decompositions run concurrently; the output order is always by `n`.
pub fn multiplicity_sweep(
    base: &DomainSpec,
    ep: &ExponentPair,
    k: usize,
    weights: &(dyn Fn(&Arc<Grid>) -> Result<WeightPair> + Sync),
    opts: &SolverOptions,
    threads: usize,
) -> Result<Vec<SweepEntry>> {
    let dim = base.dim;
    if k < 2 || k > dim / 2 {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 2 <= k <= N/2 = {}",
            dim / 2
        )));
    }
    let run = |n: usize| -> SweepEntry {
        let m = dim - n;
        let spec = DomainSpec { dim, m, n, ..base.clone() };
        let result = crate::geometry::build_grid(spec)
            .and_then(|g| weights(&g).and_then(|wp| mountain_pass_solve(&g, &wp, ep, opts)));
        if let Err(e) = &result {
            warn!("decomposition ({m}, {n}) failed: {e}");
        }
        SweepEntry {
            decomposition: (m, n),
            result,
        }
    };
    let ns: Vec<usize> = (2..=k).collect();
    if threads <= 1 || ns.len() == 1 {
        return Ok(ns.into_iter().map(run).collect());
    }
    let mut out: Vec<Option<SweepEntry>> = vec![None; ns.len()];
    for chunk in ns.chunks(threads).zip(out.chunks_mut(threads)) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.0.iter().map(|&n| scope.spawn(move || run(n))).collect();
            for (slot, h) in chunk.1.iter_mut().zip(handles) {
                *slot = Some(h.join().expect("sweep worker panicked"));
            }
        });
    }
    Ok(out.into_iter().map(|e| e.expect("filled")).collect())
}

/// `‖u - ū‖ / ‖u‖` with `ū` the angular average on each radius.
pub fn radiality_measure(u: &Field) -> Result<f64> {
    let norm = u.norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let avg = u.radial_average();
    Ok(u.axpy(-1.0, &avg)?.norm() / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistinctVerdict {
    Distinct,
    RadialCoincidence,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distinctness {
    pub verdict: DistinctVerdict,
    /// Relative weighted L² distance on the common slice set.
    pub distance: f64,
    pub radiality: (f64, f64),
}

/// Bilinear interpolation of `u` at `(r, θ)` on its uniform grid.
fn interpolate(u: &Field, r: f64, theta: f64) -> f64 {
    let g = u.grid();
    let (r0, r1) = (g.spec().inner_radius, g.spec().outer_radius);
    let x = ((r - r0) / g.h_r()).clamp(0.0, (g.n_r() - 1) as f64);
    let y = (theta / g.h_theta()).clamp(0.0, (g.n_theta() - 1) as f64);
    debug_assert!(r >= r0 - 1e-12 && r <= r1 + 1e-12);
    let i = (x.floor() as usize).min(g.n_r() - 2);
    let j = (y.floor() as usize).min(g.n_theta() - 2);
    let (fx, fy) = (x - i as f64, y - j as f64);
    (1.0 - fx) * ((1.0 - fy) * u.at(i, j) + fy * u.at(i, j + 1))
        + fx * ((1.0 - fy) * u.at(i + 1, j) + fy * u.at(i + 1, j + 1))
}

/// Angle between the block radii of `x ∈ ℝ^N` for the split `ℝ^m × ℝ^n`.
fn block_angle(x: &[f64], m: usize) -> f64 {
    let s = x[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = x[m..].iter().map(|v| v * v).sum::<f64>().sqrt();
    t.atan2(s)
}

/// Weighted distance between two `u`-fields lifted to `ℝ^N` and sampled on the
/// coordinate 2-planes `span(e_i, e_j)`.
pub fn slice_distance(u1: &Field, u2: &Field) -> Result<f64> {
    let (g1, g2) = (u1.grid(), u2.grid());
    let (s1, s2) = (g1.spec(), g2.spec());
    if s1.dim != s2.dim || s1.inner_radius != s2.inner_radius || s1.outer_radius != s2.outer_radius {
        return Err(Error::IncompatibleGrids);
    }
    let dim = s1.dim;
    let n_r = g1.n_r().max(g2.n_r());
    let n_phi = 4 * g1.n_theta().max(g2.n_theta());
    let (r0, r1) = (s1.inner_radius, s1.outer_radius);
    let mut x = vec![0.0; dim];
    let (mut diff, mut n1, mut n2) = (0.0, 0.0, 0.0);
    for i in 0..dim {
        for j in i + 1..dim {
            for a in 0..n_r {
                let r = r0 + (r1 - r0) * a as f64 / (n_r - 1) as f64;
                let w = r.powi(dim as i32 - 1);
                for b in 0..n_phi {
                    let phi = std::f64::consts::FRAC_PI_2 * b as f64 / (n_phi - 1) as f64;
                    x.iter_mut().for_each(|v| *v = 0.0);
                    x[i] = r * phi.cos();
                    x[j] = r * phi.sin();
                    let a1 = interpolate(u1, r, block_angle(&x, g1.m()));
                    let a2 = interpolate(u2, r, block_angle(&x, g2.m()));
                    diff += w * (a1 - a2).powi(2);
                    n1 += w * a1 * a1;
                    n2 += w * a2 * a2;
                }
            }
        }
    }
    let denom = n1.max(n2).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(diff.sqrt() / denom)
}

/// Distinctness of two solutions from (typically different) decompositions.
pub fn distinctness_check(s1: &SolutionPair, s2: &SolutionPair, tol: f64) -> Result<Distinctness> {
    let distance = slice_distance(&s1.u, &s2.u)?;
    let r1 = radiality_measure(&s1.u)?;
    let r2 = radiality_measure(&s2.u)?;
    let (rad1, rad2) = (r1 <= tol, r2 <= tol);
    let verdict = if rad1 && rad2 {
        DistinctVerdict::RadialCoincidence
    } else if rad1 != rad2 || distance > tol {
        DistinctVerdict::Distinct
    } else {
        DistinctVerdict::Inconclusive
    };
    Ok(Distinctness {
        verdict,
        distance,
        radiality: (r1, r2),
    })
}
