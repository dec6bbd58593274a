use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Grid;

/// Nodal values of an `O(m) × O(n)`-invariant function on a [`Grid`].
///
/// Values are stored row-major by radius: index `i * n_theta + j`.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Field {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: vec![0.0; len],
        }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: vec![c; len],
        }
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite field value {bad}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(r, θ)` at every node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid.radii() {
            for &t in grid.angles() {
                values.push(f(r, t));
            }
        }
        Self { grid, values }
    }

    /// Samples `f(s, t)` with `s = r cos θ`, `t = r sin θ`.
    pub fn from_st(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(grid, |r, th| f(r * th.cos(), r * th.sin()))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nt = self.grid.n_theta();
        &self.values[i * nt..(i + 1) * nt]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|x| c * x)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Minimum over the interior radial rows.
    pub fn interior_min(&self) -> f64 {
        let nt = self.grid.n_theta();
        let nr = self.grid.n_r();
        self.values[nt..(nr - 1) * nt]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Mass-weighted L² norm.
    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.values)
    }

    pub fn inner(&self, other: &Field) -> f64 {
        self.grid.inner(&self.values, &other.values)
    }

    /// Sets the Dirichlet rows `r = R` and `r = R_out` to zero.
    pub fn zero_boundary(&mut self) {
        let nt = self.grid.n_theta();
        let nr = self.grid.n_r();
        self.values[..nt].iter_mut().for_each(|x| *x = 0.0);
        self.values[(nr - 1) * nt..].iter_mut().for_each(|x| *x = 0.0);
    }

    /// Mass-weighted angular average on every radius, returned as a `θ`-constant field.
    pub fn radial_average(&self) -> Field {
        let nt = self.grid.n_theta();
        let tm = self.grid.theta_mass();
        let total: f64 = tm.iter().sum();
        let mut values = vec![0.0; self.len()];
        for (row_out, row_in) in values.chunks_mut(nt).zip(self.values.chunks(nt)) {
            let avg = row_in.iter().zip(tm).map(|(a, w)| a * w).sum::<f64>() / total;
            row_out.iter_mut().for_each(|x| *x = avg);
        }
        Field {
            grid: self.grid.clone(),
            values,
        }
    }

    /// One value per radius taken from the radial average.
    pub fn radial_profile(&self) -> Vec<f64> {
        let nt = self.grid.n_theta();
        self.radial_average()
            .values
            .chunks(nt)
            .map(|row| row[0])
            .collect()
    }
}
