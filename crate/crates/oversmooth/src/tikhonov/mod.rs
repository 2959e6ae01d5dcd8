//! Evaluation and minimization of the penalized misfit functional
//! `T_alpha(u) = ||F(u) - f^delta||_inf^r + alpha ||u - u_bar||_1^r`
//! over nodal spline values, with the initial guess `u_bar = 0`.

mod optim;

use crate::error::{Error, Result};
use crate::forward::NoiseRealization;
use crate::grid::GridFunction;
use crate::rules;

use optim::{bfgs, pattern_search, Objective};

/// Exponents, smoothing, and stopping parameters for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegConfig {
    r: f64,
    a: f64,
    /// Exponent of the `l_q` surrogate that replaces the max norm during the
    /// quasi-Newton phase. The surrogate overshoots the max norm by at most
    /// `(n+1)^(1/q)`.
    pub smoothing_q: u32,
    /// Relative objective-decrease threshold that stops the quasi-Newton
    /// iteration.
    pub opt_tol: f64,
    pub max_iter: usize,
}

impl RegConfig {
    pub fn new(r: f64, a: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "misfit exponent must be positive, got {r}"
            )));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ill-posedness degree must be positive, got {a}"
            )));
        }
        Ok(RegConfig {
            r,
            a,
            smoothing_q: 64,
            opt_tol: 1e-8,
            max_iter: 600,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `kappa = 1 / (r (1 + a))`; satisfies `kappa a - 1/r = -kappa`.
    pub fn kappa(&self) -> f64 {
        1.0 / (self.r * (1.0 + self.a))
    }

    pub fn e_r(&self) -> f64 {
        rules::e_r(self.r).expect("validated at construction")
    }
}

impl Default for RegConfig {
    fn default() -> Self {
        RegConfig::new(1.0, 1.0).expect("defaults are valid")
    }
}

/// Result of one minimization run. `alpha` may be `f64::INFINITY`, in which
/// case `u` is the initial guess by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub u: GridFunction,
    pub alpha: f64,
    /// Exact functional value at `u` (unsmoothed norms).
    pub objective: f64,
    /// Exact misfit `||F(u) - f^delta||_inf`.
    pub misfit: f64,
    /// Exact penalty `||u - u_bar||_1`.
    pub penalty: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularization parameter must be positive, got {alpha}"
        )));
    }
    Ok(())
}

fn check_pinned(u: &GridFunction) -> Result<()> {
    if u.value(0).abs() > 1e-9 * (1.0 + u.max_norm()) {
        return Err(Error::Domain(format!(
            "u(0) = {} but splines are pinned to zero at x = 0",
            u.value(0)
        )));
    }
    Ok(())
}

/// Value of the functional at `u`.
///
/// `smoothed = false` gives the exact discrete max norms; `smoothed = true`
/// replaces them by the `l_q` surrogates used inside the optimizer. The
/// surrogate is never below the exact value and exceeds it by at most the
/// factor `(n+1)^(1/q)`.
pub fn evaluate(
    u: &GridFunction,
    alpha: f64,
    noise: &NoiseRealization,
    cfg: &RegConfig,
    smoothed: bool,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_pinned(u)?;
    let grid = noise.f_delta().grid();
    crate::grid::check_same_grid(u, noise.f_delta())?;
    let obj = Objective::new(
        grid,
        noise.f_delta().values(),
        alpha,
        cfg.r,
        cfg.smoothing_q as i32,
    );
    let z = &u.values()[1..];
    Ok(if smoothed {
        obj.smoothed_value(z)
    } else {
        obj.exact_value(z)
    })
}

/// Exact-norm statistics packaged as a [`Minimizer`] record.
pub(crate) fn stats_at(
    u: GridFunction,
    alpha: f64,
    noise: &NoiseRealization,
    cfg: &RegConfig,
    iterations: usize,
    converged: bool,
) -> Minimizer {
    let obj = Objective::new(
        noise.f_delta().grid(),
        noise.f_delta().values(),
        if alpha.is_finite() { alpha } else { 1.0 },
        cfg.r,
        cfg.smoothing_q as i32,
    );
    let (mut objective, misfit, penalty) = obj.exact(&u.values()[1..]);
    if !alpha.is_finite() {
        // the limit convention: misfit term only, penalty is zero at u_bar
        objective = misfit.powf(cfg.r);
    }
    Minimizer {
        u,
        alpha,
        objective,
        misfit,
        penalty,
        iterations,
        converged,
    }
}

/// Minimizes the smoothed functional from `init`, polishes on the exact
/// functional, and reports exact-norm statistics.
///
/// The quasi-Newton phase runs a short continuation over the smoothing
/// exponent so the stiff `q = smoothing_q` stage starts near a minimizer of
/// a milder surrogate. The returned point is never worse (in exact value)
/// than the initial point or the zero initial guess.
pub fn minimize(
    alpha: f64,
    noise: &NoiseRealization,
    cfg: &RegConfig,
    init: &GridFunction,
) -> Result<Minimizer> {
    check_alpha(alpha)?;
    check_pinned(init)?;
    crate::grid::check_same_grid(init, noise.f_delta())?;
    let grid = noise.f_delta().grid();
    let f_delta = noise.f_delta().values();

    let exact_obj = Objective::new(grid, f_delta, alpha, cfg.r, cfg.smoothing_q as i32);
    let init_exact = exact_obj.exact_value(&init.values()[1..]);
    if !init_exact.is_finite() {
        return Err(Error::NonFinite(format!(
            "objective at the initial point is {init_exact}"
        )));
    }

    let pipeline = |start: Vec<f64>, at_alpha: f64| -> (Vec<f64>, f64, usize, bool) {
        let exact = Objective::new(grid, f_delta, at_alpha, cfg.r, cfg.smoothing_q as i32);
        let mut z = start;
        let mut iterations = 0;
        let mut converged = false;
        let mut qs = vec![16.min(cfg.smoothing_q), cfg.smoothing_q];
        qs.dedup();
        for q in qs {
            let obj = Objective::new(grid, f_delta, at_alpha, cfg.r, q as i32);
            let out = bfgs(&obj, &mut z, cfg.opt_tol, cfg.max_iter);
            iterations += out.iterations;
            converged = out.converged;
        }
        pattern_search(|z| exact.exact_value(z), &mut z, 50);
        // sharpen: the ever-stiffer surrogates recover joint descent
        // directions that coordinate moves on the max-norm objective
        // cannot see
        for q in [4 * cfg.smoothing_q, 16 * cfg.smoothing_q] {
            let obj = Objective::new(grid, f_delta, at_alpha, cfg.r, q as i32);
            iterations += bfgs(&obj, &mut z, cfg.opt_tol, cfg.max_iter / 2).iterations;
            pattern_search(|z| exact.exact_value(z), &mut z, 30);
        }
        let value = exact.exact_value(&z);
        (z, value, iterations, converged)
    };

    let (mut z, mut candidate, mut iterations, mut converged) =
        pipeline(init.values()[1..].to_vec(), alpha);

    // second branch from the zero guess: a warm start inherited from a
    // larger parameter is biased toward smooth shapes, while the cold run
    // chases the misfit first and can land in the oscillatory valley that
    // small parameters actually favor
    let cold = vec![0.0; grid.subintervals()];
    if init.values()[1..] != cold[..] {
        let (z2, v2, it2, conv2) = pipeline(cold, alpha);
        iterations += it2;
        if v2 < candidate {
            z = z2;
            candidate = v2;
            converged = conv2;
        }
    }

    // never return something worse than the start or the initial guess
    let bar_exact = exact_obj.exact_value(&vec![0.0; z.len()]);
    if init_exact < candidate && init_exact <= bar_exact {
        z = init.values()[1..].to_vec();
    } else if bar_exact < candidate && bar_exact < init_exact {
        z = vec![0.0; z.len()];
    }

    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    values.extend_from_slice(&z);
    let u = GridFunction::new(grid, values)?;
    Ok(stats_at(u, alpha, noise, cfg, iterations, converged))
}

/// Minimizes along a descending ladder of parameters, warm-starting each run
/// from the previous minimizer; the first run starts from the zero guess.
pub fn alpha_scan(
    noise: &NoiseRealization,
    cfg: &RegConfig,
    alphas: &[f64],
) -> Result<Vec<Minimizer>> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty parameter ladder".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParameter(
            "parameter ladder must be strictly positive".into(),
        ));
    }
    if alphas.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter(
            "parameter ladder must be strictly descending".into(),
        ));
    }
    warm_scan(noise, cfg, alphas)
}

/// Warm-started scan without the ordering requirement; the discrepancy
/// search uses this for its ascending branch.
pub(crate) fn warm_scan(
    noise: &NoiseRealization,
    cfg: &RegConfig,
    alphas: &[f64],
) -> Result<Vec<Minimizer>> {
    let mut out = Vec::with_capacity(alphas.len());
    let mut start = GridFunction::zeros(noise.f_delta().grid());
    for &alpha in alphas {
        let m = minimize(alpha, noise, cfg, &start)?;
        start = m.u.clone();
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{make_noise, ProblemSetup};
    use crate::grid::Grid;
    use crate::rng::SeededRng;

    fn toy_noise(n: usize, delta: f64, seed: u64) -> NoiseRealization {
        let setup = ProblemSetup::new(0.3, Grid::new(n).unwrap()).unwrap();
        make_noise(&setup, delta, seed).unwrap()
    }

    #[test]
    fn config_identity_and_defaults() {
        let cfg = RegConfig::default();
        assert_eq!(cfg.r(), 1.0);
        assert_eq!(cfg.a(), 1.0);
        assert_eq!(cfg.kappa(), 0.5);
        assert_eq!(cfg.e_r(), 1.0);
        // kappa a - 1/r = -kappa
        let lhs = cfg.kappa() * cfg.a() - 1.0 / cfg.r();
        assert!((lhs + cfg.kappa()).abs() <= 1e-15);
        assert!(RegConfig::new(0.0, 1.0).is_err());
        assert!(RegConfig::new(1.0, 0.0).is_err());

        let half = RegConfig::new(0.5, 1.0).unwrap();
        let lhs = half.kappa() * half.a() - 1.0 / half.r();
        assert!((lhs + half.kappa()).abs() <= 1e-15);
    }

    #[test]
    fn evaluate_at_initial_guess_is_pure_misfit() {
        let noise = toy_noise(60, 0.01, 3);
        let cfg = RegConfig::default();
        let u_bar = GridFunction::zeros(noise.f_delta().grid());
        for &alpha in &[1e-4, 1.0, 1e3] {
            let v = evaluate(&u_bar, alpha, &noise, &cfg, false).unwrap();
            let misfit = noise.f_delta().map(|x| x - 1.0).unwrap().max_norm();
            assert!((v - misfit.powf(cfg.r())).abs() <= 1e-14);
        }
        assert!(evaluate(&u_bar, 0.0, &noise, &cfg, false).is_err());
    }

    #[test]
    fn smoothing_sandwich() {
        let noise = toy_noise(100, 0.01, 5);
        let cfg = RegConfig::default();
        let mut rng = SeededRng::new(8);
        for _ in 0..20 {
            let mut vals = rng.standard_normal_vec(101);
            vals[0] = 0.0;
            let u = GridFunction::new(noise.f_delta().grid(), vals).unwrap();
            let exact = evaluate(&u, 0.5, &noise, &cfg, false).unwrap();
            let smooth = evaluate(&u, 0.5, &noise, &cfg, true).unwrap();
            assert!(smooth >= exact - 1e-12);
            // both norms overshoot by at most (n+1)^(1/q), so the whole
            // functional does as well
            let bound = 101f64.powf(1.0 / 64.0);
            assert!(
                smooth <= exact * bound * (1.0 + 1e-12),
                "{smooth} vs {exact}"
            );
        }
    }

    #[test]
    fn oversmoothing_shows_up_in_the_penalty() {
        // at zero noise the solution itself has tiny misfit but a penalty
        // that grows with refinement
        let mut penalties = Vec::new();
        for n in [100, 400] {
            let setup = ProblemSetup::new(0.3, Grid::new(n).unwrap()).unwrap();
            let noise = make_noise(&setup, 0.0, 1).unwrap();
            let obj_parts = {
                let misfit = crate::forward::apply_f(setup.u_true())
                    .sub(noise.f_delta())
                    .unwrap()
                    .max_norm();
                let penalty = crate::calculus::apply_g_inverse(setup.u_true())
                    .unwrap()
                    .max_norm();
                (misfit, penalty)
            };
            assert!(obj_parts.0 <= 2e-3, "misfit {} at n = {n}", obj_parts.0);
            penalties.push(obj_parts.1);
        }
        assert!(penalties[1] / penalties[0] >= 0.5 * 4.0f64.powf(0.7));
    }

    #[test]
    fn huge_alpha_returns_the_initial_guess() {
        let noise = toy_noise(50, 0.01, 11);
        let cfg = RegConfig::default();
        let u_bar = GridFunction::zeros(noise.f_delta().grid());
        let m = minimize(1e3, &noise, &cfg, &u_bar).unwrap();
        assert!(
            m.u.max_norm() <= 1e-3,
            "moved {} away from 0",
            m.u.max_norm()
        );
        let bar_misfit = noise.f_delta().map(|x| x - 1.0).unwrap().max_norm();
        assert!((m.misfit - bar_misfit).abs() <= 1e-6);
        assert!(m.objective >= m.misfit.powf(cfg.r()) - 1e-14);
    }

    #[test]
    fn local_minimality_on_a_toy_problem() {
        let noise = toy_noise(10, 0.02, 2);
        let cfg = RegConfig::default();
        let init = GridFunction::zeros(noise.f_delta().grid());
        let m = minimize(0.05, &noise, &cfg, &init).unwrap();
        let base = evaluate(&m.u, 0.05, &noise, &cfg, false).unwrap();
        let mut rng = SeededRng::new(44);
        for _ in 0..200 {
            let mut vals = m.u.values().to_vec();
            for v in vals.iter_mut().skip(1) {
                *v += 1e-3 * rng.standard_normal();
            }
            let u = GridFunction::new(noise.f_delta().grid(), vals).unwrap();
            let perturbed = evaluate(&u, 0.05, &noise, &cfg, false).unwrap();
            assert!(perturbed >= base - 1e-12, "{perturbed} < {base}");
        }
    }

    #[test]
    fn never_worse_than_the_initial_guess() {
        let noise = toy_noise(40, 0.05, 9);
        let cfg = RegConfig::default();
        let u_bar = GridFunction::zeros(noise.f_delta().grid());
        let bar_value = |alpha: f64| evaluate(&u_bar, alpha, &noise, &cfg, false).unwrap();
        for &alpha in &[1e-6, 1e-3, 0.1, 10.0, 1e4] {
            let m = minimize(alpha, &noise, &cfg, &u_bar).unwrap();
            assert!(
                m.objective <= bar_value(alpha) + 1e-12,
                "alpha {alpha}: {} > {}",
                m.objective,
                bar_value(alpha)
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let noise = toy_noise(20, 0.01, 1);
        let cfg = RegConfig::default();
        let bad_init = GridFunction::constant(noise.f_delta().grid(), 1.0).unwrap();
        assert!(minimize(0.1, &noise, &cfg, &bad_init).is_err());
        let ok_init = GridFunction::zeros(noise.f_delta().grid());
        assert!(minimize(-1.0, &noise, &cfg, &ok_init).is_err());
    }

    #[test]
    fn minimize_is_bitwise_reproducible() {
        let noise = toy_noise(30, 0.02, 6);
        let cfg = RegConfig::default();
        let init = GridFunction::zeros(noise.f_delta().grid());
        let a = minimize(0.01, &noise, &cfg, &init).unwrap();
        let b = minimize(0.01, &noise, &cfg, &init).unwrap();
        assert_eq!(a.u.values(), b.u.values());
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.misfit.to_bits(), b.misfit.to_bits());
        assert_eq!(a.penalty.to_bits(), b.penalty.to_bits());
    }

    #[test]
    fn single_rung_scan_equals_minimize() {
        let noise = toy_noise(30, 0.02, 6);
        let cfg = RegConfig::default();
        let init = GridFunction::zeros(noise.f_delta().grid());
        let direct = minimize(0.05, &noise, &cfg, &init).unwrap();
        let scan = alpha_scan(&noise, &cfg, &[0.05]).unwrap();
        assert_eq!(scan.len(), 1);
        assert_eq!(scan[0].u.values(), direct.u.values());
        assert_eq!(scan[0].objective.to_bits(), direct.objective.to_bits());
    }

    #[test]
    fn scan_validates_the_ladder() {
        let noise = toy_noise(20, 0.02, 6);
        let cfg = RegConfig::default();
        assert!(alpha_scan(&noise, &cfg, &[]).is_err());
        assert!(alpha_scan(&noise, &cfg, &[0.1, 0.2]).is_err());
        assert!(alpha_scan(&noise, &cfg, &[0.1, 0.0]).is_err());
    }

    #[test]
    fn misfit_falls_and_penalty_rises_down_a_small_ladder() {
        let noise = toy_noise(40, 0.05, 4);
        let cfg = RegConfig::default();
        let alphas: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
        let runs = alpha_scan(&noise, &cfg, &alphas).unwrap();
        let tol = 1.02; // 2 percent slack, exact only for exact minimizers
        for w in runs.windows(2) {
            assert!(
                w[1].misfit <= w[0].misfit * tol,
                "misfit rose: {} -> {}",
                w[0].misfit,
                w[1].misfit
            );
            assert!(
                w[1].penalty * tol >= w[0].penalty,
                "penalty fell: {} -> {}",
                w[0].penalty,
                w[1].penalty
            );
        }
    }
}
