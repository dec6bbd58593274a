//! Dirichlet solves with `-Δ + c` on the truncated shell.
//!
//! The unknowns are the interior radial rows (all angles, axis rows included).
//! The assembled operator is self-adjoint in the lumped mass inner product, so
//! conjugate gradients run in that inner product.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cone::{cone_membership, ConeReport};
use crate::error::{Error, Result};
use crate::field::{same_grid, Field};
use crate::geometry::Grid;
use crate::linalg::{dot_w, solve_tridiagonal, Csr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    #[default]
    Jacobi,
    /// Exact inverse through the tensor structure `R ⊗ I + diag(r⁻²) ⊗ Θ + c`.
    Separable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Debug, Clone)]
struct SeparableFactors {
    // angular eigenvectors of M^{1/2} Θ M^{-1/2}, column-major n_theta × n_theta
    q: Vec<f64>,
    lambda: Vec<f64>,
    sqrt_m: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HelmholtzSystem {
    grid: Arc<Grid>,
    shift: f64,
    matrix: Csr,
    inv_diag: Vec<f64>,
    interior_mass: Vec<f64>,
    separable: SeparableFactors,
    preconditioner: Preconditioner,
    max_iter: usize,
}

/// Assembles `-Δ + 1` with Dirichlet rows at `r = R` and `r = R_out`.
pub fn assemble(grid: &Arc<Grid>) -> HelmholtzSystem {
    HelmholtzSystem::new(grid.clone(), 1.0)
}

impl HelmholtzSystem {
    /// Assembles `-Δ + shift`; `shift = 0` gives the Dirichlet Laplacian.
    pub fn new(grid: Arc<Grid>, shift: f64) -> Self {
        let nt = grid.n_theta();
        let nr = grid.n_r();
        let n_int = (nr - 2) * nt;
        let (rp, rm) = grid.radial_stencil();
        let (ap, am) = grid.angular_stencil();
        let ir2 = grid.inv_r2();
        let mut rows = Vec::with_capacity(n_int);
        for i in 1..nr - 1 {
            for j in 0..nt {
                let k = (i - 1) * nt + j;
                let mut row = Vec::with_capacity(5);
                let mut diag = rp[i] + rm[i] + shift;
                if i > 1 {
                    row.push((k - nt, -rm[i]));
                }
                if j > 0 {
                    row.push((k - 1, -ir2[i] * am[j]));
                    diag += ir2[i] * am[j];
                }
                if j + 1 < nt {
                    row.push((k + 1, -ir2[i] * ap[j]));
                    diag += ir2[i] * ap[j];
                }
                row.push((k, diag));
                if i < nr - 2 {
                    row.push((k + nt, -rp[i]));
                }
                rows.push(row);
            }
        }
        let matrix = Csr::from_rows(n_int, rows);
        let inv_diag = matrix.diagonal().iter().map(|d| 1.0 / d).collect();
        let interior_mass = grid.mass()[nt..(nr - 1) * nt].to_vec();
        let separable = Self::factor_angular(&grid);
        let max_iter = (50.0 * ((nr * nt) as f64).sqrt()).ceil() as usize;
        Self {
            grid,
            shift,
            matrix,
            inv_diag,
            interior_mass,
            separable,
            preconditioner: Preconditioner::Jacobi,
            max_iter,
        }
    }

    fn factor_angular(grid: &Grid) -> SeparableFactors {
        let (eig, sqrt_m) = symmetric_angular_eigen(grid);
        SeparableFactors {
            q: eig.eigenvectors.as_slice().to_vec(),
            lambda: eig.eigenvalues.as_slice().to_vec(),
            sqrt_m,
        }
    }

    pub fn with_preconditioner(mut self, p: Preconditioner) -> Self {
        self.preconditioner = p;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn preconditioner(&self) -> Preconditioner {
        self.preconditioner
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Assembled interior operator (rows/cols over interior nodes).
    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    pub fn interior_len(&self) -> usize {
        self.matrix.nrows
    }

    pub fn interior_mass(&self) -> &[f64] {
        &self.interior_mass
    }

    pub fn restrict<'a>(&self, full: &'a [f64]) -> &'a [f64] {
        let nt = self.grid.n_theta();
        &full[nt..nt + self.interior_len()]
    }

    pub fn extend(&self, interior: &[f64]) -> Vec<f64> {
        let nt = self.grid.n_theta();
        let mut full = vec![0.0; self.grid.len()];
        full[nt..nt + interior.len()].copy_from_slice(interior);
        full
    }

    /// Applies the assembled operator: interior rows give `-Δu + c u` (boundary values
    /// treated as zero), Dirichlet rows return `u` itself.
    pub fn apply(&self, u: &Field) -> Field {
        let nt = self.grid.n_theta();
        let mut out = u.values().to_vec();
        let interior = self.restrict(u.values());
        self.matrix
            .mul_vec(interior, &mut out[nt..nt + self.interior_len()]);
        Field::from_values(self.grid.clone(), out).expect("same grid")
    }

    /// `(-Δ + c)` on interior values, zero Dirichlet data.
    pub fn apply_interior(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec(x, y);
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        match self.preconditioner {
            Preconditioner::Jacobi => {
                z.iter_mut()
                    .zip(r)
                    .zip(&self.inv_diag)
                    .for_each(|((zv, rv), d)| *zv = rv * d);
            }
            Preconditioner::Separable => self.separable_solve(r, z),
        }
    }

    fn separable_solve(&self, r: &[f64], z: &mut [f64]) {
        let nt = self.grid.n_theta();
        let nri = self.grid.n_r() - 2;
        let SeparableFactors { q, lambda, sqrt_m } = &self.separable;
        // forward transform: b̂_{i,k} = Σ_j Q_{jk} sqrt(m_j) r_{i,j}
        let mut hat = vec![0.0; nri * nt];
        for i in 0..nri {
            let row = &r[i * nt..(i + 1) * nt];
            for k in 0..nt {
                let col = &q[k * nt..(k + 1) * nt];
                hat[k * nri + i] = col
                    .iter()
                    .zip(row)
                    .zip(sqrt_m)
                    .map(|((qv, rv), s)| qv * s * rv)
                    .sum();
            }
        }
        let (rp, rm) = self.grid.radial_stencil();
        let ir2 = self.grid.inv_r2();
        let mut lower = vec![0.0; nri];
        let mut upper = vec![0.0; nri];
        let mut diag = vec![0.0; nri];
        for k in 0..nt {
            for i in 0..nri {
                let gi = i + 1;
                lower[i] = if i > 0 { -rm[gi] } else { 0.0 };
                upper[i] = if i + 1 < nri { -rp[gi] } else { 0.0 };
                diag[i] = rp[gi] + rm[gi] + self.shift + lambda[k] * ir2[gi];
            }
            let sol = solve_tridiagonal(&lower, &diag, &upper, &hat[k * nri..(k + 1) * nri]);
            hat[k * nri..(k + 1) * nri].copy_from_slice(&sol);
        }
        for i in 0..nri {
            for j in 0..nt {
                let mut acc = 0.0;
                for k in 0..nt {
                    acc += q[k * nt + j] * hat[k * nri + i];
                }
                z[i * nt + j] = acc / sqrt_m[j];
            }
        }
    }

    /// Preconditioned CG on interior values with an initial guess.
    pub fn solve_interior(
        &self,
        rhs: &[f64],
        guess: Option<&[f64]>,
        tol: f64,
    ) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.interior_len();
        let w = &self.interior_mass;
        let bnorm = dot_w(rhs, rhs, w).sqrt();
        let mut x = guess.map_or_else(|| vec![0.0; n], |g| g.to_vec());
        if bnorm == 0.0 {
            return Ok((
                vec![0.0; n],
                SolveStats {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let mut r = vec![0.0; n];
        self.matrix.mul_vec(&x, &mut r);
        r.iter_mut().zip(rhs).for_each(|(rv, b)| *rv = b - *rv);
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot_w(&r, &z, w);
        let mut rel = dot_w(&r, &r, w).sqrt() / bnorm;
        let mut it = 0;
        while rel > tol {
            if it >= self.max_iter {
                return Err(Error::NonConvergence {
                    solver: "pcg",
                    iterations: it,
                    residual: rel,
                });
            }
            self.matrix.mul_vec(&p, &mut ap);
            let alpha = rz / dot_w(&p, &ap, w);
            x.iter_mut().zip(&p).for_each(|(xv, pv)| *xv += alpha * pv);
            r.iter_mut().zip(&ap).for_each(|(rv, av)| *rv -= alpha * av);
            rel = dot_w(&r, &r, w).sqrt() / bnorm;
            it += 1;
            if rel <= tol {
                break;
            }
            self.precondition(&r, &mut z);
            let rz_new = dot_w(&r, &z, w);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(pv, zv)| *pv = zv + beta * *pv);
        }
        Ok((
            x,
            SolveStats {
                iterations: it,
                relative_residual: rel,
            },
        ))
    }

    /// Solves `(-Δ + c) u = f` with `u = 0` on both radial boundaries.
    pub fn solve(&self, f: &Field, tol: f64) -> Result<(Field, SolveStats)> {
        if !same_grid(f.grid(), &self.grid) {
            return Err(Error::IncompatibleGrids);
        }
        let (x, stats) = self.solve_interior(self.restrict(f.values()), None, tol)?;
        let u = Field::from_values(self.grid.clone(), self.extend(&x))?;
        Ok((u, stats))
    }
}

fn symmetric_angular_eigen(grid: &Grid) -> (SymmetricEigen<f64, nalgebra::Dyn>, Vec<f64>) {
    let nt = grid.n_theta();
    let (ap, am) = grid.angular_stencil();
    let sqrt_m: Vec<f64> = grid.theta_mass().iter().map(|m| m.sqrt()).collect();
    // Θ = -(angular stencil); symmetrised S = M^{1/2} Θ M^{-1/2}
    let mut s = DMatrix::<f64>::zeros(nt, nt);
    for j in 0..nt {
        s[(j, j)] = ap[j] + am[j];
        if j + 1 < nt {
            let off = -ap[j] * sqrt_m[j] / sqrt_m[j + 1];
            s[(j, j + 1)] = off;
            s[(j + 1, j)] = off;
        }
    }
    (SymmetricEigen::new(s), sqrt_m)
}

/// Eigenpairs of the discrete angular operator `-(∂_θθ - κ ∂_θ)` (Neumann at both axes),
/// sorted by eigenvalue. Eigenvectors are in nodal variables, normalised to unit
/// `θ`-mass norm with a positive last entry.
pub fn angular_eigenpairs(grid: &Grid) -> Vec<(f64, Vec<f64>)> {
    let nt = grid.n_theta();
    let (eig, sqrt_m) = symmetric_angular_eigen(grid);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..nt)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            let mut v: Vec<f64> = (0..nt).map(|j| col[j] / sqrt_m[j]).collect();
            if v[nt - 1] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// `(-Δ + 1) u = f`, `u = 0` on `r = R, R_out`, to relative residual `tol`.
pub fn helmholtz_solve(sys: &HelmholtzSystem, f: &Field, tol: f64) -> Result<Field> {
    sys.solve(f, tol).map(|(u, _)| u)
}

#[derive(Debug, Clone)]
pub struct InvarianceStep {
    pub v: Field,
    pub stats: SolveStats,
    pub cone: ConeReport,
}

/// Solves `-Δv + v = w û^{d-1}` and reports whether `v` stays in the cone.
///
/// The cone tolerance is `10 tol` relative to `max |v|`.
pub fn pointwise_invariance_step(
    sys: &HelmholtzSystem,
    u_hat: &Field,
    weight: &Field,
    d: f64,
    tol: f64,
) -> Result<InvarianceStep> {
    let rhs = u_hat.zip_map(weight, |u, w| w * u.max(0.0).powf(d - 1.0))?;
    let (v, stats) = sys.solve(&rhs, tol)?;
    let cone = cone_membership(&v, 10.0 * tol * v.max_abs());
    Ok(InvarianceStep { v, stats, cone })
}
