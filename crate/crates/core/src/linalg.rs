//! Small dense/sparse kernels: CSR storage, tridiagonal solves, weighted GMRES.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(col, val)` lists, columns sorted within each row.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *yi = self.col_idx[a..b]
                .iter()
                .zip(&self.vals[a..b])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| {
                let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
                (a..b)
                    .find(|&k| self.col_idx[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row[self.col_idx[k]] += self.vals[k];
            }
        }
        d
    }
}

/// Solves a tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// by the Thomas algorithm (no pivoting; intended for diagonally dominant systems).
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

pub(crate) fn dot_w(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), m)| x * y * m).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Restarted GMRES in the inner product `⟨x, y⟩ = Σ w_k x_k y_k`, zero initial guess.
pub fn gmres(
    apply: &mut dyn FnMut(&[f64], &mut [f64]) -> Result<()>,
    rhs: &[f64],
    weights: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<f64>, GmresStats)> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = dot_w(rhs, rhs, weights).sqrt();
    if bnorm == 0.0 {
        return Ok((
            x,
            GmresStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut total = 0;
    let mut r = rhs.to_vec();
    let mut tmp = vec![0.0; n];
    let mut rel;
    loop {
        let beta = dot_w(&r, &r, weights).sqrt();
        rel = beta / bnorm;
        if rel <= tol {
            break;
        }
        if total >= max_iter {
            return Err(Error::NonConvergence {
                solver: "gmres",
                iterations: total,
                residual: rel,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            apply(&basis[k], &mut tmp)?;
            let mut w = tmp.clone();
            for (i, b) in basis.iter().enumerate() {
                let hik = dot_w(&w, b, weights);
                h[i][k] = hik;
                w.iter_mut().zip(b).for_each(|(wv, bv)| *wv -= hik * bv);
            }
            // reorthogonalise once for stability on indefinite systems
            for (i, b) in basis.iter().enumerate() {
                let c = dot_w(&w, b, weights);
                h[i][k] += c;
                w.iter_mut().zip(b).for_each(|(wv, bv)| *wv -= c * bv);
            }
            let wn = dot_w(&w, &w, weights).sqrt();
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= tol || total >= max_iter || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[i]).for_each(|(xv, bv)| *xv += yi * bv);
        }
        apply(&x, &mut tmp)?;
        r.iter_mut()
            .zip(rhs)
            .zip(&tmp)
            .for_each(|((rv, b), a)| *rv = b - a);
    }
    Ok((
        x,
        GmresStats {
            iterations: total,
            relative_residual: rel,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x_true[i];
                if i > 0 {
                    s += lower[i] * x_true[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x_true[i + 1];
                }
                s
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let a = [[3.0, 1.0, 0.0], [-1.0, 2.0, 0.5], [0.0, 2.0, -4.0]];
        let b = [1.0, 2.0, 3.0];
        let w = [1.0, 2.0, 0.5];
        let mut apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..3 {
                y[i] = (0..3).map(|j| a[i][j] * x[j]).sum();
            }
            Ok(())
        };
        let (x, stats) = gmres(&mut apply, &b, &w, 1e-13, 3, 50).unwrap();
        assert!(stats.relative_residual <= 1e-13);
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn restarted_gmres_converges_on_dominant_system() {
        let n = 30;
        let mut apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = 4.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 }
                    + 0.5 * if i + 1 < n { x[i + 1] } else { 0.0 };
            }
            Ok(())
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, stats) = gmres(&mut apply, &b, &vec![1.0; n], 1e-12, 4, 200).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax).unwrap();
        for (a, c) in ax.iter().zip(&b) {
            assert!((a - c).abs() < 1e-10);
        }
    }
}
