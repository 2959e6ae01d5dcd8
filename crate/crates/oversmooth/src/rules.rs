//! Regularization-parameter selection: a-priori power rules per smoothness
//! class and the sequential discrepancy principle on a geometric ladder.

use crate::error::{Error, Result};
use crate::forward::{NoiseRealization, ProblemSetup};
use crate::grid::GridFunction;
use crate::tikhonov::{minimize, stats_at, warm_scan, Minimizer, RegConfig};

/// Misfit threshold constant: `1` for `r >= 1`, otherwise `2^(1/r - 1)`.
pub fn e_r(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent must be positive, got {r}"
        )));
    }
    Ok(if r >= 1.0 {
        1.0
    } else {
        2f64.powf(-1.0 + 1.0 / r)
    })
}

/// Solution smoothness classes that drive the parameter rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothnessCase {
    /// Membership in the closure of the range of `G` only. The payload is
    /// the exponent `s` of the a-priori rule `alpha = c delta^s`; any `s`
    /// with `0 < s kappa a < 1` drives both the parameter and the scaled
    /// noise term to zero.
    NoExplicit { alpha_exponent: f64 },
    /// `u* = G^p w` for the given `p` in `(0, 1]`.
    Hoelder(f64),
    /// Logarithmic source condition.
    LowOrder,
}

impl SmoothnessCase {
    pub fn hoelder(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hoelder index must lie in (0, 1], got {p}"
            )));
        }
        Ok(SmoothnessCase::Hoelder(p))
    }
}

/// A-priori parameter choice `alpha(delta)` scaled by `c`.
///
/// * Hoelder `p`: `c * delta^(1 / (kappa (p + a)))`,
/// * low order: `c * delta`,
/// * no explicit smoothness: `c * delta^s` for the caller-supplied `s`,
///   admissible only when `s kappa a < 1`.
pub fn apriori_alpha(case: SmoothnessCase, delta: f64, cfg: &RegConfig, c: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be positive, got {delta}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rule constant must be positive, got {c}"
        )));
    }
    let kappa = cfg.kappa();
    match case {
        SmoothnessCase::Hoelder(p) => {
            SmoothnessCase::hoelder(p)?;
            Ok(c * delta.powf(1.0 / (kappa * (p + cfg.a()))))
        }
        SmoothnessCase::LowOrder => Ok(c * delta),
        SmoothnessCase::NoExplicit { alpha_exponent: s } => {
            if !(s > 0.0 && s * kappa * cfg.a() < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "exponent {s} inadmissible: need 0 < s * kappa * a < 1"
                )));
            }
            Ok(c * delta.powf(s))
        }
    }
}

/// Constants of the sequential discrepancy scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyConfig {
    /// Target multiple of the noise level; must exceed `e_r`.
    pub b: f64,
    /// Ladder ratio, greater than one.
    pub theta: f64,
    /// Starting parameter.
    pub alpha0: f64,
    /// Cap on the ladder length.
    pub k_max: usize,
}

impl DiscrepancyConfig {
    pub fn new(b: f64, theta: f64, alpha0: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter(format!("need b > 0, got {b}")));
        }
        if !(theta > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ladder ratio must exceed 1, got {theta}"
            )));
        }
        if !(alpha0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "starting parameter must be positive, got {alpha0}"
            )));
        }
        Ok(DiscrepancyConfig {
            b,
            theta,
            alpha0,
            k_max: 60,
        })
    }
}

impl Default for DiscrepancyConfig {
    fn default() -> Self {
        DiscrepancyConfig::new(2.0, 2.0, 1.0).expect("defaults are valid")
    }
}

/// Outcome of the discrepancy search.
#[derive(Debug, Clone)]
pub struct DiscrepancyOutcome {
    /// Selected parameter; `f64::INFINITY` when the initial guess already
    /// fits the data to `b * delta`.
    pub alpha_star: f64,
    pub minimizer: Minimizer,
    /// Visited `(alpha, misfit)` pairs in visit order.
    pub trace: Vec<(f64, f64)>,
}

/// Sequential discrepancy principle on the geometric ladder
/// `alpha_k = theta^(-+k) alpha0`.
///
/// If the initial guess already satisfies `||F(u_bar) - f^delta|| <= b delta`
/// the search returns `alpha = infinity` with the initial guess. Otherwise
/// the ladder descends (or ascends, when the misfit at `alpha0` is already
/// below the threshold) with warm starts until the first bracketing
/// `misfit(alpha*) <= b delta <= misfit(theta alpha*)`, taking the first
/// crossing even if optimizer noise makes the misfit locally non-monotone.
pub fn discrepancy_search(
    noise: &NoiseRealization,
    cfg: &RegConfig,
    dcfg: &DiscrepancyConfig,
) -> Result<DiscrepancyOutcome> {
    let delta = noise.delta();
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(
            "the discrepancy principle needs a positive noise level".into(),
        ));
    }
    let er = e_r(cfg.r())?;
    if !(dcfg.b > er) {
        return Err(Error::InvalidParameter(format!(
            "need b > {er}, got b = {}",
            dcfg.b
        )));
    }
    let threshold = dcfg.b * delta;

    // step 1: the initial guess may already fit the data
    let u_bar = GridFunction::zeros(noise.f_delta().grid());
    let bar = stats_at(u_bar, f64::INFINITY, noise, cfg, 0, true);
    if bar.misfit <= threshold {
        let trace = vec![(f64::INFINITY, bar.misfit)];
        return Ok(DiscrepancyOutcome {
            alpha_star: f64::INFINITY,
            minimizer: bar,
            trace,
        });
    }

    let mut trace = Vec::new();
    let first = minimize(
        dcfg.alpha0,
        noise,
        cfg,
        &GridFunction::zeros(noise.f_delta().grid()),
    )?;
    trace.push((dcfg.alpha0, first.misfit));

    if first.misfit >= threshold {
        // descend until the misfit first drops through the threshold
        let mut prev = first;
        for k in 1..=dcfg.k_max {
            let alpha = dcfg.theta.powi(-(k as i32)) * dcfg.alpha0;
            let m = minimize(alpha, noise, cfg, &prev.u)?;
            trace.push((alpha, m.misfit));
            if m.misfit <= threshold && prev.misfit >= threshold {
                return Ok(DiscrepancyOutcome {
                    alpha_star: alpha,
                    minimizer: m,
                    trace,
                });
            }
            prev = m;
        }
    } else {
        // ascend until the misfit first rises through the threshold and
        // keep the last parameter below it
        let mut prev = first;
        for k in 1..=dcfg.k_max {
            let alpha = dcfg.theta.powi(k as i32) * dcfg.alpha0;
            let m = minimize(alpha, noise, cfg, &prev.u)?;
            trace.push((alpha, m.misfit));
            if prev.misfit <= threshold && m.misfit >= threshold {
                return Ok(DiscrepancyOutcome {
                    alpha_star: alpha / dcfg.theta,
                    minimizer: prev,
                    trace,
                });
            }
            prev = m;
        }
    }

    Err(Error::LadderExhausted { trace })
}

/// Warm-started minimization at an exact target parameter, approached down
/// a geometric ladder from `alpha0`. Used by the a-priori rules, whose
/// target parameters sit far below any sensible cold start.
pub fn minimize_at_alpha(
    alpha: f64,
    noise: &NoiseRealization,
    cfg: &RegConfig,
    alpha0: f64,
    theta: f64,
) -> Result<Minimizer> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target parameter must be positive, got {alpha}"
        )));
    }
    let mut ladder = Vec::new();
    let mut rung = alpha0;
    while rung > alpha * (1.0 + 1e-12) {
        ladder.push(rung);
        rung /= theta;
    }
    ladder.push(alpha);
    let runs = warm_scan(noise, cfg, &ladder)?;
    Ok(runs.into_iter().last().expect("ladder is nonempty"))
}

/// Reconstruction error scaled by the expected rate:
/// `||u - u*||_inf / delta^(p / (p + a))`.
pub fn rate_ratio(minimizer: &Minimizer, setup: &ProblemSetup, delta: f64, cfg: &RegConfig) -> f64 {
    debug_assert!(delta > 0.0);
    let err = minimizer
        .u
        .sub(setup.u_true())
        .expect("minimizer lives on the setup grid")
        .max_norm();
    err / delta.powf(setup.p_true() / (setup.p_true() + cfg.a()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::make_noise;
    use crate::grid::Grid;

    #[test]
    fn misfit_threshold_constant() {
        assert_eq!(e_r(1.0).unwrap(), 1.0);
        assert_eq!(e_r(2.0).unwrap(), 1.0);
        assert_eq!(e_r(0.5).unwrap(), 2.0);
        assert!(e_r(0.0).is_err());
        assert!(e_r(-1.0).is_err());
    }

    #[test]
    fn apriori_rules() {
        let cfg = RegConfig::default();
        // kappa = 1/2; Hoelder p = 0.3 gives exponent 2/1.3
        let alpha = apriori_alpha(SmoothnessCase::Hoelder(0.3), 0.01, &cfg, 1.0).unwrap();
        let expected = 0.01f64.powf(2.0 / 1.3);
        assert!((alpha - expected).abs() <= 1e-15 * expected);
        assert!((expected - 8.377e-4).abs() <= 1e-6);

        let alpha = apriori_alpha(SmoothnessCase::LowOrder, 0.01, &cfg, 1.0).unwrap();
        assert_eq!(alpha, 0.01);

        // at p = 1 the exponent collapses to 1
        let alpha = apriori_alpha(SmoothnessCase::Hoelder(1.0), 0.01, &cfg, 3.0).unwrap();
        assert!((alpha - 0.03).abs() <= 1e-15);

        let admissible = SmoothnessCase::NoExplicit {
            alpha_exponent: 1.5,
        };
        assert!(apriori_alpha(admissible, 0.01, &cfg, 1.0).is_ok());
        let inadmissible = SmoothnessCase::NoExplicit {
            alpha_exponent: 2.5,
        };
        assert!(apriori_alpha(inadmissible, 0.01, &cfg, 1.0).is_err());
        assert!(apriori_alpha(SmoothnessCase::Hoelder(0.3), 0.0, &cfg, 1.0).is_err());
    }

    #[test]
    fn discrepancy_config_validation() {
        assert!(DiscrepancyConfig::new(2.0, 2.0, 1.0).is_ok());
        assert!(DiscrepancyConfig::new(2.0, 1.0, 1.0).is_err());
        assert!(DiscrepancyConfig::new(2.0, 2.0, 0.0).is_err());
        assert!(DiscrepancyConfig::new(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn huge_noise_takes_the_initial_guess_branch() {
        let setup = ProblemSetup::new(0.3, Grid::new(50).unwrap()).unwrap();
        let noise = make_noise(&setup, 10.0, 1).unwrap();
        let cfg = RegConfig::default();
        let out = discrepancy_search(&noise, &cfg, &DiscrepancyConfig::default()).unwrap();
        assert_eq!(out.alpha_star, f64::INFINITY);
        assert_eq!(out.minimizer.u.values(), setup.u_bar().values());
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn zero_noise_is_rejected() {
        let setup = ProblemSetup::new(0.3, Grid::new(20).unwrap()).unwrap();
        let noise = make_noise(&setup, 0.0, 1).unwrap();
        let cfg = RegConfig::default();
        assert!(discrepancy_search(&noise, &cfg, &DiscrepancyConfig::default()).is_err());
    }

    #[test]
    fn search_brackets_the_threshold() {
        let setup = ProblemSetup::new(0.3, Grid::new(50).unwrap()).unwrap();
        let noise = make_noise(&setup, 0.05, 1).unwrap();
        let cfg = RegConfig::default();
        let dcfg = DiscrepancyConfig::default();
        let out = discrepancy_search(&noise, &cfg, &dcfg).unwrap();
        assert!(out.alpha_star.is_finite());
        let threshold = dcfg.b * noise.delta();
        assert!(out.minimizer.misfit <= threshold);
        // the trace certifies the bracketing with ratio theta
        let above = out
            .trace
            .iter()
            .find(|(a, _)| (a / (out.alpha_star * dcfg.theta) - 1.0).abs() <= 1e-9)
            .expect("adjacent rung present");
        assert!(above.1 >= threshold);
        // selected parameter is a ladder rung theta^(-k) alpha0
        let k = (out.alpha_star / dcfg.alpha0).log(dcfg.theta);
        assert!(
            (k - k.round()).abs() <= 1e-9,
            "{} not on the ladder",
            out.alpha_star
        );
    }

    #[test]
    fn ascending_branch_selects_the_last_rung_below() {
        // start the ladder far too small so the first misfit is already
        // below the threshold and the scan must ascend
        let setup = ProblemSetup::new(0.3, Grid::new(50).unwrap()).unwrap();
        let noise = make_noise(&setup, 0.05, 1).unwrap();
        let cfg = RegConfig::default();
        let dcfg = DiscrepancyConfig::new(2.0, 2.0, 1e-6).unwrap();
        let out = discrepancy_search(&noise, &cfg, &dcfg).unwrap();
        assert!(out.alpha_star.is_finite());
        assert!(out.minimizer.misfit <= dcfg.b * noise.delta());
        assert!(out.trace.len() >= 2);
    }

    #[test]
    fn exhausted_ladder_reports_its_trace() {
        // a one-rung cap cannot bracket the threshold at this noise level
        let setup = ProblemSetup::new(0.3, Grid::new(40).unwrap()).unwrap();
        let noise = make_noise(&setup, 0.01, 1).unwrap();
        let cfg = RegConfig::default();
        let dcfg = DiscrepancyConfig {
            k_max: 1,
            ..Default::default()
        };
        match discrepancy_search(&noise, &cfg, &dcfg) {
            Err(crate::Error::LadderExhausted { trace }) => {
                assert_eq!(trace.len(), 2);
                assert!(trace.iter().all(|(_, m)| *m > dcfg.b * noise.delta()));
            }
            other => panic!("expected ladder exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn rate_ratio_reproduces_reported_values() {
        // scaled errors from the two reference tables
        let cfg = RegConfig::default();
        let check = |err: f64, delta: f64, p: f64, want: f64| {
            let ratio = err / delta.powf(p / (p + cfg.a()));
            assert!((ratio - want).abs() <= 5e-4, "got {ratio}, want {want}");
        };
        check(0.2118, 0.05, 0.3, 0.4228);
        check(0.0916, 0.05, 0.7, 0.3146);
    }

    #[test]
    fn rate_ratio_of_perfect_recovery_is_zero() {
        let setup = ProblemSetup::new(0.3, Grid::new(30).unwrap()).unwrap();
        let noise = make_noise(&setup, 0.01, 1).unwrap();
        let cfg = RegConfig::default();
        let m = stats_at(setup.u_true().clone(), 0.5, &noise, &cfg, 0, true);
        assert_eq!(rate_ratio(&m, &setup, 0.01, &cfg), 0.0);
    }
}
