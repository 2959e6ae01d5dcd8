//! The mesh-refinement study behind the tolerance manifest.
//!
//! Each observation is a scalar error or constant measured on a fixed,
//! seeded configuration. The manifest records a budget for every key below;
//! `tests/study.rs` recomputes the observations and fails when a budget is
//! exceeded, so the manifest can never drift away from the code.

use crate::calculus::{
    apply_g, frac_integral_rl, frac_power_balakrishnan, resolvent_solve, QuadratureConfig,
};
use crate::grid::{Grid, GridFunction};
use crate::regop::{low_order_decay, LavrentievFamily};
use crate::rng::SeededRng;

#[derive(Debug, Clone)]
pub struct Observation {
    pub key: &'static str,
    pub value: f64,
}

/// Recomputes every manifest-tracked quantity.
pub fn observations() -> Vec<Observation> {
    let mut out = Vec::new();

    for (key, n) in [
        ("trapz_x03_n100", 100),
        ("trapz_x03_n200", 200),
        ("trapz_x03_n400", 400),
    ] {
        out.push(Observation {
            key,
            value: trapezoid_error_on_root(n),
        });
    }

    for (key, n) in [("abel_n100", 100), ("abel_n400", 400)] {
        out.push(Observation {
            key,
            value: abel_identity_error(n),
        });
    }

    out.push(Observation {
        key: "semigroup_rel_n100",
        value: semigroup_defect(100),
    });
    out.push(Observation {
        key: "semigroup_offset_rel_n100",
        value: semigroup_offset_defect(100),
    });
    out.push(Observation {
        key: "balakrishnan_vs_rl_n100",
        value: oracle_disagreement(100),
    });
    out.push(Observation {
        key: "resolvent_expfit_n100",
        value: resolvent_exp_error(100, 0.5),
    });
    out.push(Observation {
        key: "kappa_star_n100",
        value: observed_kappa_star(100),
    });
    out.push(Observation {
        key: "interpolation_max_ratio_n100",
        value: interpolation_max_ratio(100),
    });
    out.push(Observation {
        key: "log_representative_sup_n200",
        value: log_representative_sup(200),
    });

    out
}

/// Max-norm error of the cumulative trapezoid on `x^0.3` against the closed
/// form `x^1.3 / 1.3`.
pub fn trapezoid_error_on_root(n: usize) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let u = GridFunction::from_fn(grid, |x| x.powf(0.3)).expect("finite");
    let gu = apply_g(&u);
    grid.nodes()
        .enumerate()
        .map(|(i, x)| (gu.value(i) - x.powf(1.3) / 1.3).abs())
        .fold(0.0, f64::max)
}

/// Max over `p` in `{0.3, 0.5, 0.7}` of the error of the fractional
/// integral on constants against `x^p`.
pub fn abel_identity_error(n: usize) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let mut worst = 0.0f64;
    for &p in &[0.3, 0.5, 0.7] {
        let u = GridFunction::constant(grid, libm::tgamma(1.0 + p)).expect("finite");
        let gp = frac_integral_rl(p, &u).expect("order in range");
        for (i, x) in grid.nodes().enumerate() {
            worst = worst.max((gp.value(i) - x.powf(p)).abs());
        }
    }
    worst
}

fn semigroup_defect_of(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let w = GridFunction::from_fn(grid, f).expect("finite");
    let ab =
        frac_integral_rl(0.3, &frac_integral_rl(0.4, &w).expect("in range")).expect("in range");
    let c = frac_integral_rl(0.7, &w).expect("in range");
    ab.sub(&c).expect("same grid").max_norm() / c.max_norm()
}

/// Relative composition defect of fractional orders `0.3 * 0.4` against the
/// single order `0.7` on a smooth input from the spline class.
pub fn semigroup_defect(n: usize) -> f64 {
    semigroup_defect_of(n, |x| (std::f64::consts::PI * x).sin())
}

/// The same defect for an input with `w(0) != 0`: the intermediate result
/// then carries a fractional kink at the origin whose linear interpolant
/// costs an extra `O(h^(1+min(p,q)))`.
pub fn semigroup_offset_defect(n: usize) -> f64 {
    semigroup_defect_of(n, |x| (std::f64::consts::PI * x).sin() + 0.5)
}

/// Max over `p` in `{0.3, 0.5, 0.7}` and three smooth spline-class inputs
/// of the relative disagreement between the resolvent-quadrature and
/// product-integration fractional powers.
pub fn oracle_disagreement(n: usize) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let pi = std::f64::consts::PI;
    let inputs = [
        GridFunction::from_fn(grid, |x| (pi * x).sin()).expect("finite"),
        GridFunction::from_fn(grid, |x| x * (1.0 - x)).expect("finite"),
        GridFunction::from_fn(grid, |x| x * (-x).exp()).expect("finite"),
    ];
    let mut worst = 0.0f64;
    for u in &inputs {
        for &p in &[0.3, 0.5, 0.7] {
            let quad = frac_power_balakrishnan(p, u, QuadratureConfig::default())
                .expect("valid configuration");
            let rl = frac_integral_rl(p, u).expect("in range");
            worst = worst.max(quad.sub(&rl).expect("same grid").max_norm() / rl.max_norm());
        }
    }
    worst
}

/// Max-norm error of the shifted solve against `exp(-x / beta)`.
pub fn resolvent_exp_error(n: usize, beta: f64) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let w = GridFunction::constant(grid, beta).expect("finite");
    let v = resolvent_solve(beta, &w).expect("beta > 0");
    grid.nodes()
        .enumerate()
        .map(|(i, x)| (v.value(i) - (-x / beta).exp()).abs())
        .fold(0.0, f64::max)
}

/// Observed positive-type constant `sup beta ||(G + beta I)^{-1} w|| / ||w||`
/// over seeded random inputs and a log-spaced range of shifts.
pub fn observed_kappa_star(n: usize) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let mut rng = SeededRng::new(1001);
    let mut sup = 0.0f64;
    for _ in 0..100 {
        let w = GridFunction::new(grid, rng.standard_normal_vec(grid.len())).expect("finite");
        let beta = 10f64.powf(rng.uniform_in(-3.0, 1.0));
        let v = resolvent_solve(beta, &w).expect("beta > 0");
        sup = sup.max(beta * v.max_norm() / w.max_norm());
    }
    sup
}

/// Observed max of `||G^p u|| / (6 ||Gu||^p ||u||^(1-p))` over 200 seeded
/// random inputs and `p` in `{0.25, 0.5, 0.75}`.
pub fn interpolation_max_ratio(n: usize) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let mut rng = SeededRng::new(2002);
    let mut sup = 0.0f64;
    for _ in 0..200 {
        let u = GridFunction::new(grid, rng.standard_normal_vec(grid.len())).expect("finite");
        let gu_norm = apply_g(&u).max_norm();
        let u_norm = u.max_norm();
        for &p in &[0.25, 0.5, 0.75] {
            let lhs = frac_integral_rl(p, &u).expect("in range").max_norm();
            let rhs = 6.0 * gu_norm.powf(p) * u_norm.powf(1.0 - p);
            sup = sup.max(lhs / rhs);
        }
    }
    sup
}

/// Sampled sup of `||S_beta u|| log(1/beta)` for the logarithmic
/// representative `u(x) = 1 / (1 + log(1/x))`, iteration count 2.
pub fn log_representative_sup(n: usize) -> f64 {
    let grid = Grid::new(n).expect("n > 0");
    let fam = LavrentievFamily::new(2, grid).expect("m >= 1");
    let u = GridFunction::from_fn(grid, |x| {
        if x == 0.0 {
            0.0
        } else {
            1.0 / (1.0 + (1.0 / x).ln())
        }
    })
    .expect("finite");
    low_order_decay(&fam, &u, 0.0)
        .expect("valid power")
        .sup_ratio
}
