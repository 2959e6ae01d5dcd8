//! Reconstruction-quality checks against the reference table and figure
//! values, matched distributionally across seeds.

use oversmooth::forward::{make_noise, ProblemSetup};
use oversmooth::rules::{discrepancy_search, DiscrepancyConfig};
use oversmooth::tikhonov::{alpha_scan, RegConfig};
use oversmooth::Grid;

/// Error at the reference parameter 1.953e-3 (the selected rung of the
/// reference figure) for delta = 0.0125: the median over five seeds must
/// land within fifty percent of the reported 0.193.
#[test]
fn figure_best_rung_error_is_in_the_reported_vicinity() {
    let setup = ProblemSetup::new(0.3, Grid::new(100).unwrap()).unwrap();
    let cfg = RegConfig::default();
    let ladder: Vec<f64> = (0..=9).map(|k| 2f64.powi(-k)).collect();
    assert!((ladder[9] - 1.953125e-3).abs() < 1e-12);
    let mut errors: Vec<f64> = (1..=5)
        .map(|seed| {
            let noise = make_noise(&setup, 0.0125, seed).unwrap();
            let runs = alpha_scan(&noise, &cfg, &ladder).unwrap();
            runs.last()
                .unwrap()
                .u
                .sub(setup.u_true())
                .unwrap()
                .max_norm()
        })
        .collect();
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = errors[2];
    println!("errors at the reference rung: {errors:?}, median {median:.4}");
    assert!(
        (0.5 * 0.193..=1.5 * 0.193).contains(&median),
        "median {median} outside [0.0965, 0.2895]"
    );
}

/// The selected parameter always sits on the geometric ladder, and the
/// returned misfit satisfies the stopping inequality.
#[test]
fn selected_parameter_lands_on_the_ladder() {
    let setup = ProblemSetup::new(0.3, Grid::new(100).unwrap()).unwrap();
    let cfg = RegConfig::default();
    let dcfg = DiscrepancyConfig::default();
    for seed in [1u64, 2] {
        let noise = make_noise(&setup, 0.05, seed).unwrap();
        let out = discrepancy_search(&noise, &cfg, &dcfg).unwrap();
        assert!(out.minimizer.misfit <= dcfg.b * noise.delta());
        let k = (out.alpha_star / dcfg.alpha0).log(dcfg.theta);
        assert!(
            (k - k.round()).abs() <= 1e-9,
            "seed {seed}: {} is not a ladder rung",
            out.alpha_star
        );
    }
}
