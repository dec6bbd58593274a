//! The monotone cone `{u ≥ 0, u_θ ≤ 0}` and its discrete projection.

use serde::{Deserialize, Serialize};

use crate::field::Field;

/// Weighted antitonic regression (nonincreasing fit) by pool-adjacent-violators.
///
/// Minimises `Σ w_j (x_j - y_j)²` over nonincreasing `x`. Weights must be positive.
pub fn antitonic_regression(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len());
    // blocks: (weighted sum, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yj, &wj) in y.iter().zip(w) {
        debug_assert!(wj > 0.0, "weights must be positive");
        let mut cur = (wj * yj, wj, 1usize);
        while let Some(&(s, ws, c)) = blocks.last() {
            // violation: previous block mean below the current one
            if s / ws < cur.0 / cur.1 {
                cur = (cur.0 + s, cur.1 + ws, cur.2 + c);
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, ws, c) in blocks {
        out.extend(std::iter::repeat(s / ws).take(c));
    }
    out
}

/// Row-by-row weighted antitonic regression in `θ` followed by clipping at zero.
pub fn cone_project(u: &Field) -> Field {
    let grid = u.grid().clone();
    let nt = grid.n_theta();
    let w = grid.theta_mass();
    let mut values = Vec::with_capacity(u.len());
    for row in u.values().chunks(nt) {
        values.extend(antitonic_regression(row, w).into_iter().map(|x| x.max(0.0)));
    }
    Field::from_values(grid, values).expect("projection preserves shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    /// `max(0, -min u)`.
    pub negativity: f64,
    /// Largest positive increment `u_{i,j+1} - u_{i,j}` along any `θ`-row.
    pub max_increase: f64,
    pub tol: f64,
    pub member: bool,
}

impl ConeReport {
    pub fn violation(&self) -> f64 {
        self.negativity.max(self.max_increase)
    }
}

pub fn cone_membership(u: &Field, tol: f64) -> ConeReport {
    let nt = u.grid().n_theta();
    let negativity = (-u.min()).max(0.0);
    let max_increase = u
        .values()
        .chunks(nt)
        .flat_map(|row| row.windows(2).map(|p| p[1] - p[0]))
        .fold(0.0, f64::max);
    ConeReport {
        negativity,
        max_increase,
        tol,
        member: negativity <= tol && max_increase <= tol,
    }
}
