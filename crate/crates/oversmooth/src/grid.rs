//! Uniform grids on `[0, 1]` and nodal representations of functions.
//!
//! Functions are identified with their values at the `n + 1` equidistant
//! nodes `x_i = i / n`; interpolation between nodes is piecewise linear
//! wherever an operation needs values off the grid.

use crate::error::{Error, Result};

/// Uniform partition of `[0, 1]` into `n` subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one subinterval".into(),
            ));
        }
        Ok(Grid { n })
    }

    /// Number of subintervals.
    pub fn subintervals(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Step size `h = 1 / n`.
    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node `x_i = i * h`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        i as f64 * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.node(i))
    }
}

/// Nodal values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps a value vector, enforcing the length and finiteness invariants.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "value vector has length {}, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("node {i} holds {:?}", values[i])));
        }
        Ok(GridFunction { grid, values })
    }

    /// Internal constructor for values produced by operations that cannot
    /// introduce non-finite entries from finite inputs.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        GridFunction { grid, values }
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Discrete max norm `max_i |u_i|`.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self - other`.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        check_same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction::from_parts(self.grid, values))
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        check_same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        GridFunction::new(self.grid, values)
    }

    pub fn scale(&self, c: f64) -> Result<GridFunction> {
        GridFunction::new(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }
}

pub(crate) fn check_same_grid(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(
            a.grid().subintervals(),
            b.grid().subintervals(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_cover_unit_interval() {
        let grid = Grid::new(100).unwrap();
        let nodes: Vec<f64> = grid.nodes().collect();
        assert_eq!(nodes.len(), 101);
        assert_eq!(nodes[0], 0.0);
        // h * n must reproduce 1 up to representation rounding
        assert!((nodes[100] - 1.0).abs() <= f64::EPSILON);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_empty_grid_and_bad_values() {
        assert!(Grid::new(0).is_err());
        let grid = Grid::new(4).unwrap();
        assert!(GridFunction::new(grid, vec![0.0; 4]).is_err());
        assert!(GridFunction::new(grid, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(GridFunction::new(grid, vec![0.0, 1.0, f64::INFINITY, 0.0, 0.0]).is_err());
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = GridFunction::zeros(Grid::new(4).unwrap());
        let b = GridFunction::zeros(Grid::new(5).unwrap());
        assert!(matches!(a.sub(&b), Err(Error::GridMismatch(4, 5))));
    }
}
