//! Objective evaluation and the minimization backend.
//!
//! Decision variables are the nodal values at `x_1 .. x_n`; the node at
//! `x = 0` is pinned to zero. The sup norms in the functional are replaced
//! by scaled `l_q` surrogates for the quasi-Newton phase, then the result is
//! polished by a coordinate pattern search on the exact functional.

use crate::calculus::apply_g_transpose;
use crate::grid::{Grid, GridFunction};

/// Scaled `l_q` norm: `max * (sum (|v_i|/max)^q)^(1/q)`.
///
/// Lies between the max norm and `len^(1/q)` times it.
pub(crate) fn lq_norm(v: &[f64], q: i32) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x.abs() / max).powi(q)).sum();
    max * sum.powf(1.0 / q as f64)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// The discretized functional for one noise realization, with the initial
/// guess fixed at zero.
pub(crate) struct Objective<'a> {
    grid: Grid,
    f_delta: &'a [f64],
    pub alpha: f64,
    pub r: f64,
    pub q: i32,
}

impl<'a> Objective<'a> {
    pub fn new(grid: Grid, f_delta: &'a [f64], alpha: f64, r: f64, q: i32) -> Self {
        Objective {
            grid,
            f_delta,
            alpha,
            r,
            q,
        }
    }

    fn n(&self) -> usize {
        self.grid.subintervals()
    }

    /// Misfit residuals `exp((Gu)_i) - f^delta_i` and the forward values.
    fn residuals(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let h = self.grid.step();
        let mut fu = Vec::with_capacity(n + 1);
        let mut res = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        let mut prev = 0.0; // u_0 = 0
        fu.push(1.0);
        res.push(1.0 - self.f_delta[0]);
        for i in 1..=n {
            let ui = z[i - 1];
            acc += 0.5 * h * (prev + ui);
            prev = ui;
            let f = acc.exp();
            fu.push(f);
            res.push(f - self.f_delta[i]);
        }
        (res, fu)
    }

    /// Forward differences of `u` (equal to those of `u - u_bar`).
    fn differences(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n();
        let h = self.grid.step();
        let mut d = Vec::with_capacity(n);
        d.push(z[0] / h);
        for j in 1..n {
            d.push((z[j] - z[j - 1]) / h);
        }
        d
    }

    /// Exact functional `||F(u) - f^delta||^r + alpha ||u - u_bar||_1^r`
    /// together with the two exact norms.
    pub fn exact(&self, z: &[f64]) -> (f64, f64, f64) {
        let (res, _) = self.residuals(z);
        let misfit = max_norm(&res);
        let penalty = max_norm(&self.differences(z));
        let value = misfit.powf(self.r) + self.alpha * penalty.powf(self.r);
        (value, misfit, penalty)
    }

    pub fn exact_value(&self, z: &[f64]) -> f64 {
        self.exact(z).0
    }

    /// Smoothed functional with the `l_q` surrogates.
    pub fn smoothed_value(&self, z: &[f64]) -> f64 {
        let (res, _) = self.residuals(z);
        let misfit = lq_norm(&res, self.q);
        let penalty = lq_norm(&self.differences(z), self.q);
        misfit.powf(self.r) + self.alpha * penalty.powf(self.r)
    }

    /// Smoothed value and its gradient with respect to `z`.
    pub fn smoothed_value_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.n();
        let h = self.grid.step();
        let q = self.q;
        let (res, fu) = self.residuals(z);
        let d = self.differences(z);
        let misfit = lq_norm(&res, q);
        let penalty = lq_norm(&d, q);
        let value = misfit.powf(self.r) + self.alpha * penalty.powf(self.r);

        grad.iter_mut().for_each(|g| *g = 0.0);

        // misfit part: G^T (dM/de . F(u)), restricted to nodes 1..n
        if misfit > 0.0 {
            let weighted: Vec<f64> = res
                .iter()
                .zip(&fu)
                .map(|(&e, &f)| {
                    let m = e.signum() * (e.abs() / misfit).powi(q - 1);
                    m * f
                })
                .collect();
            let gt = apply_g_transpose(&GridFunction::from_parts(self.grid, weighted));
            let factor = self.r * misfit.powf(self.r - 1.0);
            for k in 1..=n {
                grad[k - 1] += factor * gt.value(k);
            }
        }

        // penalty part through the forward differences
        if penalty > 0.0 {
            let t: Vec<f64> = d
                .iter()
                .map(|&x| x.signum() * (x.abs() / penalty).powi(q - 1))
                .collect();
            let factor = self.alpha * self.r * penalty.powf(self.r - 1.0);
            for k in 1..=n {
                let down = t[k - 1];
                let up = if k < n { t[k] } else { 0.0 };
                grad[k - 1] += factor * (down - up) / h;
            }
        }

        value
    }
}

pub(crate) struct BfgsOutcome {
    pub iterations: usize,
    pub converged: bool,
}

/// Inverse of the squared forward-difference operator with the left node
/// pinned: `(D^T D)^{-1} = h^2 (min(j, k) + 1)` in 0-indexed coordinates.
///
/// Seeding the inverse Hessian with the penalty geometry makes the first
/// descent directions smooth ramp-like shapes. Raw gradients have forward
/// differences so large that the penalty kink at the initial guess blocks
/// every step along them once `alpha / h` exceeds the misfit slope.
fn penalty_metric_inverse(n: usize, h: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            m[j * n + k] = h * h * (j.min(k) + 1) as f64;
        }
    }
    m
}

/// Dense BFGS with backtracking line search on the smoothed functional,
/// seeded with the penalty-metric preconditioner.
pub(crate) fn bfgs(
    obj: &Objective,
    z: &mut Vec<f64>,
    opt_tol: f64,
    max_iter: usize,
) -> BfgsOutcome {
    let n = z.len();
    let h = obj.grid.step();
    let mut hmat = penalty_metric_inverse(n, h);
    let mut grad = vec![0.0; n];
    let mut value = obj.smoothed_value_grad(z, &mut grad);
    let mut first_update = true;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let mut dir = neg_matvec(&hmat, &grad);
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            // not a descent direction, fall back to steepest descent
            hmat = identity(n);
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&dir, &grad);
            if !(slope < 0.0) {
                converged = true; // zero gradient
                break;
            }
        }

        // backtracking Armijo search; the upper range covers the small
        // scale of the preconditioned first direction
        let mut step = 1.0;
        let mut accepted = None;
        for growth in 0..3 {
            if growth > 0 {
                step = 10f64.powi(2 * growth);
            }
            let mut local = step;
            for _ in 0..60 {
                let trial: Vec<f64> = z.iter().zip(&dir).map(|(a, b)| a + local * b).collect();
                let tv = obj.smoothed_value(&trial);
                if tv.is_finite() && tv <= value + 1e-4 * local * slope {
                    accepted = Some((trial, tv, local));
                    break;
                }
                local *= 0.5;
            }
            if accepted.is_some() || !first_update {
                break;
            }
        }
        let Some((znew, vnew, _)) = accepted else {
            // no progress along this direction; treat as a stall
            converged = true;
            break;
        };

        let mut grad_new = vec![0.0; n];
        let vcheck = obj.smoothed_value_grad(&znew, &mut grad_new);
        debug_assert!((vcheck - vnew).abs() <= 1e-9 * (1.0 + vnew.abs()));

        let s: Vec<f64> = znew.iter().zip(z.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm2(&s) * norm2(&y) {
            if first_update {
                // Oren-Luenberger scaling of the seed metric
                let hy = matvec(&hmat, &y);
                let scale = sy / dot(&y, &hy);
                if scale.is_finite() && scale > 0.0 {
                    hmat.iter_mut().for_each(|v| *v *= scale);
                }
                first_update = false;
            }
            bfgs_update(&mut hmat, &s, &y, sy);
        }

        let decrease = value - vnew;
        *z = znew;
        grad = grad_new;
        value = vnew;

        if decrease <= opt_tol * (1.0 + value.abs()) {
            converged = true;
            break;
        }
    }

    BfgsOutcome {
        iterations,
        converged,
    }
}

/// Pattern search (exploratory coordinate moves plus aggregate pattern
/// moves) on an arbitrary objective; used to polish the quasi-Newton result
/// on the exact, nonsmooth functional. The pattern move lets the search
/// descend along joint directions that single-coordinate moves cannot see.
pub(crate) fn pattern_search(
    value: impl Fn(&[f64]) -> f64,
    z: &mut Vec<f64>,
    max_sweeps: usize,
) -> f64 {
    let n = z.len();
    let scale = 1.0 + max_norm(z);
    let mut step = 0.02 * scale;
    let min_step = 1e-7 * scale;
    let mut best = value(z);

    let explore = |point: &mut Vec<f64>, mut current: f64, step: f64| -> f64 {
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let old = point[j];
                point[j] = old + sign * step;
                let v = value(point);
                if v + 1e-15 < current {
                    current = v;
                    break;
                }
                point[j] = old;
            }
        }
        current
    };

    for _ in 0..max_sweeps {
        let mut trial = z.clone();
        let explored = explore(&mut trial, best, step);
        if explored + 1e-15 < best {
            // pattern move: extrapolate the aggregate direction, then
            // explore around the extrapolated point
            let mut pattern: Vec<f64> = trial
                .iter()
                .zip(z.iter())
                .map(|(t, b)| 2.0 * t - b)
                .collect();
            let pattern_value = value(&pattern);
            let pattern_explored = explore(&mut pattern, pattern_value, step);
            if pattern_explored + 1e-15 < explored {
                *z = pattern;
                best = pattern_explored;
            } else {
                *z = trial;
                best = explored;
            }
        } else {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }
    best
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn neg_matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| -dot(&m[i * n..(i + 1) * n], v)).collect()
}

fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// In-place inverse-Hessian update
/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    // hy = H y
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    // H <- H - rho (s (Hy)^T + (Hy) s^T) + rho^2 yHy s s^T + rho s s^T
    let c = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + c * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::rng::SeededRng;

    #[test]
    fn lq_brackets_the_max_norm() {
        let v = [0.3, -1.2, 0.9, 0.0];
        let lq = lq_norm(&v, 64);
        assert!(lq >= 1.2);
        assert!(lq <= 1.2 * (4.0f64).powf(1.0 / 64.0));
        assert_eq!(lq_norm(&[0.0, 0.0], 64), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let grid = Grid::new(12).unwrap();
        let f_delta: Vec<f64> = grid.nodes().map(|x| (0.4 * x).exp() + 0.01).collect();
        let obj = Objective::new(grid, &f_delta, 0.05, 1.0, 8);
        let mut rng = SeededRng::new(2);
        let z: Vec<f64> = (0..12).map(|_| 0.5 * rng.standard_normal()).collect();
        let mut grad = vec![0.0; z.len()];
        let v0 = obj.smoothed_value_grad(&z, &mut grad);
        assert!((v0 - obj.smoothed_value(&z)).abs() <= 1e-12 * (1.0 + v0));
        let eps = 1e-6;
        for j in 0..z.len() {
            let mut zp = z.clone();
            zp[j] += eps;
            let mut zm = z.clone();
            zm[j] -= eps;
            let fd = (obj.smoothed_value(&zp) - obj.smoothed_value(&zm)) / (2.0 * eps);
            assert!(
                (fd - grad[j]).abs() <= 1e-4 * (1.0 + fd.abs()),
                "coordinate {j}: fd {fd} vs analytic {}",
                grad[j]
            );
        }
    }

    #[test]
    fn bfgs_solves_a_small_instance() {
        // with alpha tiny the smoothed misfit should be driven far down
        let grid = Grid::new(10).unwrap();
        let f_delta: Vec<f64> = grid.nodes().map(|x| (0.5 * x * x).exp()).collect();
        let obj = Objective::new(grid, &f_delta, 1e-10, 1.0, 16);
        let mut z = vec![0.0; 10];
        let out = bfgs(&obj, &mut z, 1e-12, 500);
        assert!(out.iterations > 0);
        let (_, misfit, _) = obj.exact(&z);
        assert!(misfit < 2e-3, "misfit {misfit}");
    }

    #[test]
    fn pattern_search_descends_a_quadratic() {
        let target = [0.3, -0.7, 1.1];
        let f = |z: &[f64]| {
            z.iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        let mut z = vec![0.0; 3];
        let v = pattern_search(f, &mut z, 200);
        assert!(v < 1e-6, "final value {v}");
    }
}
