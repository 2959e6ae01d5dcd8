//! Drivers for the convergence experiments: parameter-choice runs over a
//! `(delta, seed)` grid, per-parameter reconstruction sweeps for the
//! minimizer figures, and rate-slope fits.
//!
//! Cells of a grid are independent and run on a worker pool; results are
//! collected in grid order so emitted tables are deterministic.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{make_noise, ProblemSetup};
use crate::grid::Grid;
use crate::regop::slope;
use crate::rules::{
    apriori_alpha, discrepancy_search, minimize_at_alpha, rate_ratio, DiscrepancyConfig,
    SmoothnessCase,
};
use crate::tikhonov::{alpha_scan, Minimizer, RegConfig};

/// Parameter-choice rule driving a grid run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Discrepancy(DiscrepancyConfig),
    Apriori { case: SmoothnessCase, c: f64 },
}

/// One experiment grid: a problem family crossed with noise levels and seeds.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub p_true: f64,
    pub n: usize,
    pub r: f64,
    pub a: f64,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rule: Rule,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() || self.deltas.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidParameter(
                "noise levels must be nonempty and strictly decreasing".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("need at least one seed".into()));
        }
        Ok(())
    }

    pub fn reg_config(&self) -> Result<RegConfig> {
        RegConfig::new(self.r, self.a)
    }

    pub fn setup(&self) -> Result<ProblemSetup> {
        ProblemSetup::new(self.p_true, Grid::new(self.n)?)
    }
}

/// One table row. A failed discrepancy search leaves the result fields
/// empty and raises the flag; the ladder length is still reported.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub delta: f64,
    pub seed: u64,
    pub alpha_star: Option<f64>,
    pub error: Option<f64>,
    pub ratio: Option<f64>,
    pub ladder_length: usize,
    pub wall_time_ms: u128,
    pub failed: bool,
}

/// Runs every `(delta, seed)` cell of the grid.
pub fn run_grid(spec: &GridSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let cfg = spec.reg_config()?;
    let setup = spec.setup()?;
    let cells: Vec<(f64, u64)> = spec
        .deltas
        .iter()
        .flat_map(|&d| spec.seeds.iter().map(move |&s| (d, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(delta, seed)| run_cell(&setup, &cfg, spec.rule, delta, seed))
        .collect()
}

fn run_cell(
    setup: &ProblemSetup,
    cfg: &RegConfig,
    rule: Rule,
    delta: f64,
    seed: u64,
) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let noise = make_noise(setup, delta, seed)?;
    let done = |alpha: f64, m: &Minimizer, ladder_length: usize| ExperimentRecord {
        delta,
        seed,
        alpha_star: Some(alpha),
        error: Some(m.u.sub(setup.u_true()).expect("same grid").max_norm()),
        ratio: Some(rate_ratio(m, setup, delta, cfg)),
        ladder_length,
        wall_time_ms: start.elapsed().as_millis(),
        failed: false,
    };
    match rule {
        Rule::Discrepancy(dcfg) => match discrepancy_search(&noise, cfg, &dcfg) {
            Ok(out) => Ok(done(out.alpha_star, &out.minimizer, out.trace.len())),
            Err(Error::LadderExhausted { trace }) => Ok(ExperimentRecord {
                delta,
                seed,
                alpha_star: None,
                error: None,
                ratio: None,
                ladder_length: trace.len(),
                wall_time_ms: start.elapsed().as_millis(),
                failed: true,
            }),
            Err(e) => Err(e),
        },
        Rule::Apriori { case, c } => {
            let alpha = apriori_alpha(case, delta, cfg, c)?;
            let m = minimize_at_alpha(alpha, &noise, cfg, 1.0, 2.0)?;
            let rungs = (1.0f64 / alpha).log2().ceil().max(1.0) as usize;
            Ok(done(alpha, &m, rungs))
        }
    }
}

/// Median of the successful errors per noise level, in the grid's order.
pub fn median_errors(records: &[ExperimentRecord], deltas: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let mut errs: Vec<f64> = records
            .iter()
            .filter(|r| r.delta == d && !r.failed)
            .filter_map(|r| r.error)
            .collect();
        if errs.is_empty() {
            return Err(Error::DegenerateRegression(format!(
                "no successful runs at delta = {d}"
            )));
        }
        errs.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
        let mid = errs.len() / 2;
        out.push(if errs.len() % 2 == 1 {
            errs[mid]
        } else {
            0.5 * (errs[mid - 1] + errs[mid])
        });
    }
    Ok(out)
}

/// Log-log slope of median error against noise level.
///
/// Requires at least four levels spanning two decades; a constant level list
/// is refused as a degenerate regression.
pub fn rate_slope(deltas: &[f64], medians: &[f64]) -> Result<f64> {
    if deltas.len() != medians.len() || deltas.len() < 4 {
        return Err(Error::DegenerateRegression(
            "need at least four noise levels".into(),
        ));
    }
    let lo = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = deltas.iter().cloned().fold(0.0f64, f64::max);
    if !(hi / lo >= 100.0) {
        return Err(Error::DegenerateRegression(format!(
            "levels span a factor {:.3}, need at least 100",
            hi / lo
        )));
    }
    let lx: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    slope(&lx, &ly)
}

/// Reconstructions along a fixed parameter ladder at one noise realization,
/// with the discrepancy selection for reference.
#[derive(Debug, Clone)]
pub struct FigureData {
    pub alphas: Vec<f64>,
    pub runs: Vec<Minimizer>,
    pub errors: Vec<f64>,
    pub selected_alpha: f64,
    pub selected_error: f64,
}

pub fn run_figure(spec: &GridSpec, delta: f64, alphas: &[f64], seed: u64) -> Result<FigureData> {
    let cfg = spec.reg_config()?;
    let setup = spec.setup()?;
    let noise = make_noise(&setup, delta, seed)?;
    let dcfg = match spec.rule {
        Rule::Discrepancy(d) => d,
        Rule::Apriori { .. } => DiscrepancyConfig::default(),
    };
    let selected = discrepancy_search(&noise, &cfg, &dcfg)?;
    let selected_error = selected.minimizer.u.sub(setup.u_true())?.max_norm();
    let runs = alpha_scan(&noise, &cfg, alphas)?;
    let errors = runs
        .iter()
        .map(|m| m.u.sub(setup.u_true()).expect("same grid").max_norm())
        .collect();
    Ok(FigureData {
        alphas: alphas.to_vec(),
        runs,
        errors,
        selected_alpha: selected.alpha_star,
        selected_error,
    })
}
