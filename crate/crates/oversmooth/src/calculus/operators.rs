//! Dense matrix forms of the operators in the scale.
//!
//! The fast paths in this module's parent operate matrix-free; the dense
//! representation exists to make structural invariants checkable (every
//! operator in the scale is lower triangular) and to let tests compare the
//! two routes.

use crate::error::{Error, Result};
use crate::grid::{check_same_grid, Grid, GridFunction};

use super::frac::kernel_moments;
use super::resolvent_solve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    Integration,
    FracPower(f64),
    Resolvent(f64),
    Lavrentiev { m: usize, beta: f64 },
    Companion { m: usize, beta: f64 },
}

/// Dense `(n+1) x (n+1)` representation of an operator derived from the
/// integration operator.
#[derive(Debug, Clone)]
pub struct ScaleOperator {
    grid: Grid,
    kind: OperatorKind,
    /// Row-major storage.
    matrix: Vec<f64>,
}

impl ScaleOperator {
    /// Cumulative trapezoidal integration: row 0 is zero, later rows carry
    /// `h/2, h, ..., h, h/2`.
    pub fn integration(grid: Grid) -> Self {
        let n = grid.subintervals();
        let h = grid.step();
        let dim = n + 1;
        let mut matrix = vec![0.0; dim * dim];
        for i in 1..dim {
            matrix[i * dim] = 0.5 * h;
            for j in 1..i {
                matrix[i * dim + j] = h;
            }
            matrix[i * dim + i] = 0.5 * h;
        }
        ScaleOperator {
            grid,
            kind: OperatorKind::Integration,
            matrix,
        }
    }

    /// Product-integration weights of the fractional integral of order
    /// `p` in `(0, 1]`. All entries are nonnegative.
    pub fn frac_power(grid: Grid, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order must lie in (0, 1], got {p}"
            )));
        }
        let n = grid.subintervals();
        let h = grid.step();
        let dim = n + 1;
        let (m1, m2) = kernel_moments(p, h, n);
        let scale = 1.0 / (libm::tgamma(p) * h);
        let mut matrix = vec![0.0; dim * dim];
        for i in 1..dim {
            matrix[i * dim] = scale * m2[i];
            for j in 1..i {
                matrix[i * dim + j] = scale * (m2[i - j] + m1[i - j + 1]);
            }
            matrix[i * dim + i] = scale * m1[1];
        }
        Ok(ScaleOperator {
            grid,
            kind: OperatorKind::FracPower(p),
            matrix,
        })
    }

    /// `(G + beta I)^{-1}`, column by column.
    pub fn resolvent(grid: Grid, beta: f64) -> Result<Self> {
        let matrix = columns_from(grid, |e| resolvent_solve(beta, e))?;
        Ok(ScaleOperator {
            grid,
            kind: OperatorKind::Resolvent(beta),
            matrix,
        })
    }

    /// The `m`-times iterated resolvent smoother
    /// `beta^{-1} sum over j = 1..m of beta^j (G + beta I)^{-j}`.
    pub fn lavrentiev(grid: Grid, m: usize, beta: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "iteration count must be >= 1".into(),
            ));
        }
        let matrix = columns_from(grid, |e| {
            let mut v = GridFunction::zeros(grid);
            for _ in 0..m {
                let rhs = e.add_scaled(beta, &v)?;
                v = resolvent_solve(beta, &rhs)?;
            }
            Ok(v)
        })?;
        Ok(ScaleOperator {
            grid,
            kind: OperatorKind::Lavrentiev { m, beta },
            matrix,
        })
    }

    /// `beta^m (G + beta I)^{-m}`, the defect of the iterated smoother.
    pub fn companion(grid: Grid, m: usize, beta: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "iteration count must be >= 1".into(),
            ));
        }
        let matrix = columns_from(grid, |e| {
            let mut v = e.clone();
            for _ in 0..m {
                v = resolvent_solve(beta, &v)?;
            }
            v.scale(beta.powi(m as i32))
        })?;
        Ok(ScaleOperator {
            grid,
            kind: OperatorKind::Companion { m, beta },
            matrix,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.grid.len() + j]
    }

    /// Dense matrix-vector product.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let probe = GridFunction::zeros(self.grid);
        check_same_grid(&probe, u)?;
        let dim = self.grid.len();
        let v = u.values();
        let mut out = vec![0.0; dim];
        for i in 0..dim {
            let row = &self.matrix[i * dim..(i + 1) * dim];
            // rows are causal, so the sum can stop at the diagonal
            out[i] = row[..=i].iter().zip(v).map(|(a, b)| a * b).sum();
        }
        GridFunction::new(self.grid, out)
    }

    /// True when every entry strictly above the diagonal is below `tol` in
    /// modulus. The Volterra structure must survive every construction.
    pub fn is_lower_triangular(&self, tol: f64) -> bool {
        let dim = self.grid.len();
        for i in 0..dim {
            for j in (i + 1)..dim {
                if self.matrix[i * dim + j].abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

fn columns_from(
    grid: Grid,
    apply_to_basis: impl Fn(&GridFunction) -> Result<GridFunction>,
) -> Result<Vec<f64>> {
    let dim = grid.len();
    let mut matrix = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        let col = apply_to_basis(&GridFunction::new(grid, e)?)?;
        for i in 0..dim {
            matrix[i * dim + j] = col.value(i);
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{apply_g, frac_integral_rl};
    use crate::rng::SeededRng;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn all_kinds(g: Grid) -> Vec<ScaleOperator> {
        vec![
            ScaleOperator::integration(g),
            ScaleOperator::frac_power(g, 0.4).unwrap(),
            ScaleOperator::resolvent(g, 0.01).unwrap(),
            ScaleOperator::lavrentiev(g, 2, 0.05).unwrap(),
            ScaleOperator::companion(g, 2, 0.05).unwrap(),
        ]
    }

    #[test]
    fn every_kind_is_lower_triangular() {
        for op in all_kinds(grid(24)) {
            assert!(
                op.is_lower_triangular(0.0),
                "{:?} broke the Volterra structure",
                op.kind()
            );
        }
    }

    #[test]
    fn integration_matrix_shape() {
        let g = grid(16);
        let op = ScaleOperator::integration(g);
        let h = g.step();
        for j in 0..g.len() {
            assert_eq!(op.entry(0, j), 0.0);
        }
        for i in 1..g.len() {
            assert_eq!(op.entry(i, i), 0.5 * h);
        }
    }

    #[test]
    fn frac_power_entries_nonnegative() {
        for &p in &[0.25, 0.5, 0.75, 1.0] {
            let op = ScaleOperator::frac_power(grid(20), p).unwrap();
            for i in 0..op.grid().len() {
                for j in 0..=i {
                    assert!(op.entry(i, j) >= 0.0, "p = {p}: entry ({i}, {j}) negative");
                }
            }
        }
    }

    #[test]
    fn dense_routes_match_fast_paths() {
        let g = grid(30);
        let mut rng = SeededRng::new(9);
        let u = GridFunction::new(g, rng.standard_normal_vec(g.len())).unwrap();

        let dense_g = ScaleOperator::integration(g).apply(&u).unwrap();
        let fast_g = apply_g(&u);
        assert!(dense_g.sub(&fast_g).unwrap().max_norm() <= 1e-13);

        let dense_p = ScaleOperator::frac_power(g, 0.6)
            .unwrap()
            .apply(&u)
            .unwrap();
        let fast_p = frac_integral_rl(0.6, &u).unwrap();
        assert!(dense_p.sub(&fast_p).unwrap().max_norm() <= 1e-12);

        let dense_r = ScaleOperator::resolvent(g, 0.3).unwrap().apply(&u).unwrap();
        let fast_r = resolvent_solve(0.3, &u).unwrap();
        assert!(dense_r.sub(&fast_r).unwrap().max_norm() <= 1e-12);
    }

    #[test]
    fn resolvent_matrix_inverts_shifted_integration() {
        let g = grid(18);
        let beta = 0.2;
        let mut rng = SeededRng::new(21);
        let u = GridFunction::new(g, rng.standard_normal_vec(g.len())).unwrap();
        let shifted = apply_g(&u).add_scaled(beta, &u).unwrap();
        let back = ScaleOperator::resolvent(g, beta)
            .unwrap()
            .apply(&shifted)
            .unwrap();
        assert!(back.sub(&u).unwrap().max_norm() <= 1e-11);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let op = ScaleOperator::integration(grid(8));
        let u = GridFunction::zeros(grid(9));
        assert!(op.apply(&u).is_err());
    }
}
