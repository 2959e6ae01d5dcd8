//! Discrete calculus on `[0, 1]` built around the Volterra integration
//! operator `G`: cumulative integration, its left inverse, resolvents,
//! fractional powers, and the scale norms they generate.
//!
//! All operators here preserve the lower-triangular (causal) structure of
//! `G`: the value of a result at `x_i` depends only on input values at
//! `x_j, j <= i`.

mod balakrishnan;
mod frac;
mod operators;

pub use balakrishnan::{balakrishnan_self_check, frac_power_balakrishnan, QuadratureConfig};
pub use frac::frac_integral_rl;
pub use operators::{OperatorKind, ScaleOperator};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Relative slack allowed on `u(0)` when an operation requires a function
/// vanishing at the left endpoint.
const LEFT_ENDPOINT_TOL: f64 = 1e-9;

/// Cumulative trapezoidal integral: `(Gu)(x_i) = integral of u over [0, x_i]`
/// with the composite trapezoidal rule, so `(Gu)(0) = 0`.
pub fn apply_g(u: &GridFunction) -> GridFunction {
    let grid = u.grid();
    let h = grid.step();
    let v = u.values();
    let mut out = Vec::with_capacity(v.len());
    out.push(0.0);
    let mut acc = 0.0;
    for i in 1..v.len() {
        acc += 0.5 * h * (v[i - 1] + v[i]);
        out.push(acc);
    }
    GridFunction::from_parts(grid, out)
}

/// Adjoint of the trapezoidal integration matrix, used by gradient code.
pub(crate) fn apply_g_transpose(w: &GridFunction) -> GridFunction {
    let grid = w.grid();
    let h = grid.step();
    let v = w.values();
    let n = grid.subintervals();
    let mut out = vec![0.0; n + 1];
    // suffix[k] = sum of v[i] for i > k
    let mut suffix = 0.0;
    for k in (1..=n).rev() {
        out[k] = h * (0.5 * v[k] + suffix);
        suffix += v[k];
    }
    out[0] = 0.5 * h * suffix;
    GridFunction::from_parts(grid, out)
}

/// Discrete left inverse of `G`: the forward-difference derivative at nodes
/// `0..n-1`, extended by its last value to node `n`.
///
/// Requires `u(0) = 0` (up to a small relative slack), the discrete surrogate
/// for membership in the range of `G`.
pub fn apply_g_inverse(u: &GridFunction) -> Result<GridFunction> {
    let tol = LEFT_ENDPOINT_TOL * (1.0 + u.max_norm());
    if u.value(0).abs() > tol {
        return Err(Error::Domain(format!(
            "u(0) = {} but the strong norm needs u(0) = 0",
            u.value(0)
        )));
    }
    let grid = u.grid();
    let h = grid.step();
    let v = u.values();
    let n = grid.subintervals();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        out.push((v[i + 1] - v[i]) / h);
    }
    out.push(out[n - 1]);
    Ok(GridFunction::from_parts(grid, out))
}

/// Solves `(G + beta I) v = w` by forward substitution.
///
/// The system is lower triangular with diagonal `beta + h/2` away from the
/// first row, so the solve is direct and `O(n)`.
pub fn resolvent_solve(beta: f64, w: &GridFunction) -> Result<GridFunction> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "resolvent needs beta > 0, got {beta}"
        )));
    }
    let grid = w.grid();
    let h = grid.step();
    let rhs = w.values();
    let n = grid.subintervals();
    let mut v = Vec::with_capacity(n + 1);
    v.push(rhs[0] / beta);
    let diag = beta + 0.5 * h;
    // running = v[0]/2 + v[1] + ... + v[i-1]
    let mut running = 0.5 * v[0];
    for &w_i in &rhs[1..=n] {
        let vi = (w_i - h * running) / diag;
        v.push(vi);
        running += vi;
    }
    GridFunction::new(grid, v)
}

/// Applies `G^s` for `s >= 0`: the integer part by repeated trapezoidal
/// integration, the fractional part by the product-integration fractional
/// integral. `G^0` is the identity.
pub fn apply_g_power(s: f64, u: &GridFunction) -> Result<GridFunction> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power must be finite and >= 0, got {s}"
        )));
    }
    let k = s.floor();
    let f = s - k;
    let mut out = if f > 1e-12 {
        frac_integral_rl(f, u)?
    } else {
        u.clone()
    };
    for _ in 0..k as usize {
        out = apply_g(&out);
    }
    Ok(out)
}

/// Index into the scale of norms generated by `G`.
///
/// Supported values: `tau` in `[-p0, 0]` (weak norms through the max norm)
/// and `tau = 1` (the strong norm `||u'||_inf`). `p0` is the saturation
/// order of the regularization family in use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTag {
    tau: f64,
    p0: f64,
}

impl NormTag {
    pub fn new(tau: f64, p0: f64) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "saturation order must be positive, got {p0}"
            )));
        }
        let in_weak_range = tau >= -p0 && tau <= 0.0;
        if !(in_weak_range || tau == 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm index {tau} outside [-{p0}, 0] and not 1"
            )));
        }
        Ok(NormTag { tau, p0 })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Scale norm `||u||_tau`.
///
/// * `tau = 0`: the discrete max norm.
/// * `tau in [-p0, 0)`: `||G^|tau| u||_inf`.
/// * `tau = 1`: `||u'||_inf` via the forward difference; requires `u(0) = 0`.
pub fn scale_norm(tag: NormTag, u: &GridFunction) -> Result<f64> {
    if tag.tau == 0.0 {
        Ok(u.max_norm())
    } else if tag.tau < 0.0 {
        Ok(apply_g_power(-tag.tau, u)?.max_norm())
    } else {
        Ok(apply_g_inverse(u)?.max_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::rng::SeededRng;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn integration_is_exact_on_constants() {
        // u = 1 integrates to x
        let g = grid(100);
        let u = GridFunction::constant(g, 1.0).unwrap();
        let gu = apply_g(&u);
        for (i, x) in g.nodes().enumerate() {
            assert_abs_diff_eq!(gu.value(i), x, epsilon = 1e-14);
        }
    }

    #[test]
    fn integration_is_exact_on_linears() {
        let g = grid(50);
        let u = GridFunction::from_fn(g, |x| x).unwrap();
        let gu = apply_g(&u);
        for (i, x) in g.nodes().enumerate() {
            assert_abs_diff_eq!(gu.value(i), 0.5 * x * x, epsilon = 1e-14);
        }
    }

    #[test]
    fn inverse_of_linear_is_constant() {
        let g = grid(64);
        let u = GridFunction::from_fn(g, |x| x).unwrap();
        let d = apply_g_inverse(&u).unwrap();
        for i in 0..g.len() {
            assert_abs_diff_eq!(d.value(i), 1.0, epsilon = 1e-12);
        }
        let z = GridFunction::zeros(g);
        assert_eq!(apply_g_inverse(&z).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn inverse_of_square_has_first_order_error() {
        let g = grid(100);
        let h = g.step();
        let u = GridFunction::from_fn(g, |x| x * x).unwrap();
        let d = apply_g_inverse(&u).unwrap();
        let mut worst = 0.0f64;
        for (i, x) in g.nodes().enumerate() {
            worst = worst.max((d.value(i) - 2.0 * x).abs());
        }
        // forward difference of x^2 is 2x + h exactly; the endpoint copy
        // doubles that at the last node
        assert!(worst <= 2.0 * h + 1e-12, "worst error {worst}");
    }

    #[test]
    fn inverse_rejects_nonzero_left_endpoint() {
        let g = grid(10);
        let u = GridFunction::constant(g, 1.0).unwrap();
        assert!(matches!(apply_g_inverse(&u), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_recovers_smooth_functions_to_first_order() {
        let g = grid(200);
        let u = GridFunction::from_fn(g, |x| (std::f64::consts::PI * x).sin()).unwrap();
        let round = apply_g_inverse(&apply_g(&u)).unwrap();
        let mut worst = 0.0f64;
        for i in 0..g.subintervals() {
            worst = worst.max((round.value(i) - u.value(i)).abs());
        }
        // (Gu)' by forward differences equals the cell average of u
        assert!(worst <= 0.5 * g.step() * std::f64::consts::PI + 1e-12);
    }

    #[test]
    fn resolvent_round_trip_is_direct() {
        let g = grid(100);
        let mut rng = SeededRng::new(5);
        for &beta in &[1e-3, 0.1, 2.0] {
            let u = GridFunction::new(g, rng.standard_normal_vec(g.len())).unwrap();
            // w = (G + beta I) u
            let w = apply_g(&u).add_scaled(beta, &u).unwrap();
            let v = resolvent_solve(beta, &w).unwrap();
            let err = v.sub(&u).unwrap().max_norm() / u.max_norm();
            assert!(err <= 1e-12, "beta {beta}: relative error {err}");
        }
    }

    #[test]
    fn resolvent_matches_exponential_closed_form() {
        // (v + (1/beta) G v) = 1 has solution v(x) = exp(-x/beta); the solve
        // below is that equation scaled by beta
        for &(n, beta, tol) in &[(100, 0.5, 2e-5), (100, 0.1, 5e-4), (400, 0.1, 4e-5)] {
            let g = grid(n);
            let w = GridFunction::constant(g, beta).unwrap();
            let v = resolvent_solve(beta, &w).unwrap();
            let mut worst = 0.0f64;
            for (i, x) in g.nodes().enumerate() {
                worst = worst.max((v.value(i) - (-x / beta).exp()).abs());
            }
            assert!(worst <= tol, "n={n} beta={beta}: error {worst}");
        }
    }

    #[test]
    fn resolvent_positive_type_bound_with_grid_slack() {
        let g = grid(100);
        let mut rng = SeededRng::new(11);
        let mut observed = 0.0f64;
        for _ in 0..100 {
            let w = GridFunction::new(g, rng.standard_normal_vec(g.len())).unwrap();
            let beta = 10f64.powf(rng.uniform_in(-3.0, 1.0));
            let v = resolvent_solve(beta, &w).unwrap();
            observed = observed.max(v.max_norm() * beta / w.max_norm());
        }
        assert!(observed <= 2.5, "positive-type ratio {observed}");
    }

    #[test]
    fn rejects_nonpositive_beta() {
        let g = grid(10);
        let w = GridFunction::zeros(g);
        assert!(resolvent_solve(0.0, &w).is_err());
        assert!(resolvent_solve(-1.0, &w).is_err());
    }

    #[test]
    fn norm_tag_validation() {
        assert!(NormTag::new(0.0, 2.0).is_ok());
        assert!(NormTag::new(-2.0, 2.0).is_ok());
        assert!(NormTag::new(1.0, 2.0).is_ok());
        assert!(NormTag::new(-2.5, 2.0).is_err());
        assert!(NormTag::new(0.5, 2.0).is_err());
        assert!(NormTag::new(1.5, 2.0).is_err());
    }

    #[test]
    fn max_norm_and_weak_norm_examples() {
        let g = grid(2);
        let u = GridFunction::new(g, vec![0.0, -3.0, 2.0]).unwrap();
        assert_eq!(
            scale_norm(NormTag::new(0.0, 2.0).unwrap(), &u).unwrap(),
            3.0
        );

        let g = grid(100);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let weak = scale_norm(NormTag::new(-1.0, 2.0).unwrap(), &one).unwrap();
        assert_abs_diff_eq!(weak, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn strong_norm_diverges_for_rough_functions() {
        // ||x^0.3||_1 blows up under refinement like h^-0.7
        let coarse = GridFunction::from_fn(grid(100), |x| x.powf(0.3)).unwrap();
        let fine = GridFunction::from_fn(grid(400), |x| x.powf(0.3)).unwrap();
        let tag_c = NormTag::new(1.0, 2.0).unwrap();
        let nc = scale_norm(tag_c, &coarse).unwrap();
        let nf = scale_norm(tag_c, &fine).unwrap();
        let expected_growth = 4.0f64.powf(0.7);
        assert!(
            nf / nc >= 0.5 * expected_growth,
            "growth {} below half of {expected_growth}",
            nf / nc
        );
    }

    #[test]
    fn integer_and_fractional_power_split() {
        let g = grid(100);
        let u = GridFunction::constant(g, 1.0).unwrap();
        // G^1.0 of 1 is x
        let v = apply_g_power(1.0, &u).unwrap();
        assert_abs_diff_eq!(v.value(100), 1.0, epsilon = 1e-12);
        // G^0 is the identity
        let w = apply_g_power(0.0, &u).unwrap();
        assert_eq!(w.values(), u.values());
    }
}
