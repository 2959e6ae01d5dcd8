//! The exponential-of-integral forward map `F(u) = exp(Gu)`, exact test
//! problems, the seeded noise model, and empirical probes of the two-sided
//! bounds linking the data misfit to the weak norm `||G(u - u*)||_inf`.

use crate::calculus::{apply_g, apply_g_inverse};
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, Grid, GridFunction};
use crate::rng::SeededRng;

/// A synthetic problem instance with known solution.
///
/// The solution is `u*(x) = x^p` for a Hoelder index `p` in `(0, 1)`; the
/// matching exact data is `f*(x) = exp(x^{p+1} / (p+1))`. The initial guess
/// is zero. The strong norm of `u*` is infinite in the refinement limit, so
/// the penalty oversmooths.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    p_true: f64,
    grid: Grid,
    u_true: GridFunction,
    f_true: GridFunction,
    u_bar: GridFunction,
}

impl ProblemSetup {
    pub fn new(p_true: f64, grid: Grid) -> Result<Self> {
        if !(p_true > 0.0 && p_true < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hoelder index must lie in (0, 1), got {p_true}"
            )));
        }
        let u_true = GridFunction::from_fn(grid, |x| x.powf(p_true))?;
        let f_true =
            GridFunction::from_fn(grid, |x| (x.powf(p_true + 1.0) / (p_true + 1.0)).exp())?;
        Ok(ProblemSetup {
            p_true,
            grid,
            u_true,
            f_true,
            u_bar: GridFunction::zeros(grid),
        })
    }

    pub fn p_true(&self) -> f64 {
        self.p_true
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn u_true(&self) -> &GridFunction {
        &self.u_true
    }

    /// Exact data, evaluated from the closed form rather than through the
    /// discrete forward map.
    pub fn f_true(&self) -> &GridFunction {
        &self.f_true
    }

    pub fn u_bar(&self) -> &GridFunction {
        &self.u_bar
    }
}

/// One seeded draw of perturbed data at noise level `delta`.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    delta: f64,
    seed: u64,
    f_delta: GridFunction,
}

impl NoiseRealization {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn f_delta(&self) -> &GridFunction {
        &self.f_delta
    }
}

/// `F(u) = exp(Gu)` pointwise; defined for every bounded `u`.
pub fn apply_f(u: &GridFunction) -> GridFunction {
    let gu = apply_g(u);
    GridFunction::from_parts(u.grid(), gu.values().iter().map(|v| v.exp()).collect())
}

/// Directional derivative `F'(u) h = F(u) * Gh` pointwise.
pub fn frechet_apply(u: &GridFunction, h: &GridFunction) -> Result<GridFunction> {
    check_same_grid(u, h)?;
    let fu = apply_f(u);
    let gh = apply_g(h);
    GridFunction::new(
        u.grid(),
        fu.values()
            .iter()
            .zip(gh.values())
            .map(|(a, b)| a * b)
            .collect(),
    )
}

/// Draws data `f_delta` with sup-norm noise level exactly `delta`.
///
/// Interior nodes receive `delta * rho_i / max_j |rho_j|` with `rho` an
/// i.i.d. standard Gaussian vector from the seeded generator; the node at
/// `x = 0` keeps the exact value.
pub fn make_noise(setup: &ProblemSetup, delta: f64, seed: u64) -> Result<NoiseRealization> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be >= 0, got {delta}"
        )));
    }
    let n = setup.grid.subintervals();
    let mut rng = SeededRng::new(seed);
    let rho = rng.standard_normal_vec(n);
    let max = rho.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mut values = setup.f_true.values().to_vec();
    if delta > 0.0 {
        for (i, r) in rho.iter().enumerate() {
            values[i + 1] += delta * (r / max);
        }
    }
    Ok(NoiseRealization {
        delta,
        seed,
        f_delta: GridFunction::new(setup.grid, values)?,
    })
}

/// Misfit against weak norm for one random neighbor of the solution.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearitySample {
    /// `||u - u*||_{-1} = ||G(u - u*)||_inf`.
    pub weak_norm: f64,
    /// `||F(u) - f*||_inf`.
    pub misfit: f64,
    pub ratio: f64,
}

/// Samples the misfit-to-weak-norm ratio over random perturbations of the
/// solution with `||G(u - u*)||_inf <= radius`.
///
/// Each draw builds a smooth random bump `theta` vanishing at `x = 0`, pulls
/// it back through the discrete derivative, and rescales so the weak norm of
/// the perturbation hits a uniformly drawn fraction of `radius`. This
/// controls the weak norm directly, which is the quantity the two-sided
/// bounds are stated in.
pub fn nonlinearity_ratios(
    setup: &ProblemSetup,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<NonlinearitySample>> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling radius must lie in (0, 1), got {radius}"
        )));
    }
    let grid = setup.grid;
    let mut rng = SeededRng::new(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let coeffs: Vec<f64> = (1..=6)
            .map(|k| rng.standard_normal() / (k * k) as f64)
            .collect();
        let bump = GridFunction::from_fn(grid, |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * ((i + 1) as f64 * std::f64::consts::PI * x).sin())
                .sum()
        })?;
        let target = radius * rng.uniform_in(0.05, 1.0);
        let w = apply_g_inverse(&bump)?;
        let theta = apply_g(&w);
        let norm = theta.max_norm();
        if norm == 0.0 {
            continue;
        }
        let u = setup.u_true.add_scaled(target / norm, &w)?;
        let weak_norm = apply_g(&u.sub(&setup.u_true)?).max_norm();
        let misfit = apply_f(&u).sub(&setup.f_true)?.max_norm();
        out.push(NonlinearitySample {
            weak_norm,
            misfit,
            ratio: misfit / weak_norm,
        });
    }
    Ok(out)
}
