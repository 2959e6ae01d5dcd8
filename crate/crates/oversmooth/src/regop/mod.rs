//! Iterated Lavrentiev smoothing operators `R_beta`, their companions
//! `S_beta = I - R_beta G`, the auxiliary elements they generate, and the
//! decay diagnostics that calibrate convergence-rate constants.

mod logfns;

pub use logfns::{chi, chi_inverse, phi, ChiSign};

use crate::calculus::{apply_g, apply_g_power, resolvent_solve};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::rules::SmoothnessCase;

/// The `m`-times iterated Lavrentiev family on a fixed grid. Its saturation
/// order is `p0 = m`; rate experiments with ill-posedness degree `a` need
/// `m >= 1 + a`, so the default for `a = 1` is `m = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LavrentievFamily {
    m: usize,
    grid: Grid,
}

impl LavrentievFamily {
    pub fn new(m: usize, grid: Grid) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "iteration count must be >= 1".into(),
            ));
        }
        Ok(LavrentievFamily { m, grid })
    }

    /// The smallest family whose saturation covers rate experiments at
    /// ill-posedness degree `a`, that is `m = ceil(1 + a)`.
    pub fn for_degree(a: f64, grid: Grid) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ill-posedness degree must be positive, got {a}"
            )));
        }
        Self::new((1.0 + a).ceil() as usize, grid)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Saturation order of the family.
    pub fn p0(&self) -> f64 {
        self.m as f64
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing parameter must be positive, got {beta}"
        )));
    }
    Ok(())
}

/// `R_beta f` by the iteration `(G + beta I) v_k = beta v_{k-1} + f`,
/// `v_0 = 0`, returning `v_m`.
pub fn lavrentiev_apply(
    fam: &LavrentievFamily,
    beta: f64,
    f: &GridFunction,
) -> Result<GridFunction> {
    check_beta(beta)?;
    let mut v = GridFunction::zeros(fam.grid);
    for _ in 0..fam.m {
        let rhs = f.add_scaled(beta, &v)?;
        v = resolvent_solve(beta, &rhs)?;
    }
    Ok(v)
}

/// The same operator written as `beta^{-1} sum over j of beta^j
/// (G + beta I)^{-j}`; kept separate so the algebraic identity with the
/// iteration stays checkable.
pub fn lavrentiev_closed_form(
    fam: &LavrentievFamily,
    beta: f64,
    f: &GridFunction,
) -> Result<GridFunction> {
    check_beta(beta)?;
    let mut power = f.clone(); // (G + beta I)^{-j} f
    let mut acc = GridFunction::zeros(fam.grid);
    let mut beta_pow = 1.0; // beta^j
    for _ in 1..=fam.m {
        power = resolvent_solve(beta, &power)?;
        beta_pow *= beta;
        acc = acc.add_scaled(beta_pow, &power)?;
    }
    acc.scale(1.0 / beta)
}

/// Companion operator `S_beta u = beta^m (G + beta I)^{-m} u`; equals
/// `u - R_beta G u`.
pub fn companion_apply(
    fam: &LavrentievFamily,
    beta: f64,
    u: &GridFunction,
) -> Result<GridFunction> {
    check_beta(beta)?;
    let mut v = u.clone();
    for _ in 0..fam.m {
        v = resolvent_solve(beta, &v)?;
    }
    v.scale(beta.powi(fam.m as i32))
}

/// Auxiliary element `u_bar + R_beta G (u_true - u_bar)`, a smooth proxy for
/// the solution. Both defining formulas are evaluated and must agree; their
/// disagreement would mean the operator algebra is broken.
pub fn auxiliary_element(
    fam: &LavrentievFamily,
    beta: f64,
    u_true: &GridFunction,
    u_bar: &GridFunction,
) -> Result<GridFunction> {
    check_beta(beta)?;
    let diff = u_true.sub(u_bar)?;
    let via_r = u_bar.add_scaled(1.0, &lavrentiev_apply(fam, beta, &apply_g(&diff))?)?;
    let via_s = u_true.sub(&companion_apply(fam, beta, &diff)?)?;
    let scale = 1.0 + via_s.max_norm();
    let defect = via_r.sub(&via_s)?.max_norm() / scale;
    assert!(
        defect <= 1e-10,
        "auxiliary-element identity violated: defect {defect}"
    );
    Ok(via_r)
}

/// The three rate functions of the auxiliary element at one `beta`:
///
/// * `g1 = ||S_beta (u_true - u_bar)||_inf`,
/// * `g2 = beta^{-a} ||G^a S_beta (u_true - u_bar)||_inf`,
/// * `g3 = beta ||R_beta (u_true - u_bar)||_inf`.
pub fn g_functions(
    fam: &LavrentievFamily,
    beta: f64,
    u_true: &GridFunction,
    u_bar: &GridFunction,
    a: f64,
) -> Result<(f64, f64, f64)> {
    check_beta(beta)?;
    if !(a > 0.0 && a <= fam.p0()) {
        return Err(Error::InvalidParameter(format!(
            "weak-norm index must lie in (0, {}], got {a}",
            fam.p0()
        )));
    }
    let diff = u_true.sub(u_bar)?;
    let s = companion_apply(fam, beta, &diff)?;
    let g1 = s.max_norm();
    let g2 = apply_g_power(a, &s)?.max_norm() / beta.powf(a);
    let g3 = beta * lavrentiev_apply(fam, beta, &diff)?.max_norm();
    Ok((g1, g2, g3))
}

/// Smoothing-parameter choice matched to a noise level.
///
/// * no explicit smoothness: `c delta^(1/a)`,
/// * Hoelder `p`: `c delta^(1/(p + a))`,
/// * low order: `c (delta log(1/delta))^(1/a)`, defined for `delta < 1`.
pub fn beta_star(case: SmoothnessCase, delta: f64, a: f64, c: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be positive, got {delta}"
        )));
    }
    if !(a > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "index and constant must be positive".into(),
        ));
    }
    Ok(match case {
        SmoothnessCase::NoExplicit { .. } => c * delta.powf(1.0 / a),
        SmoothnessCase::Hoelder(p) => {
            SmoothnessCase::hoelder(p)?;
            c * delta.powf(1.0 / (p + a))
        }
        SmoothnessCase::LowOrder => {
            if delta >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "low-order choice needs delta < 1, got {delta}"
                )));
            }
            c * (delta * (1.0 / delta).ln()).powf(1.0 / a)
        }
    })
}

/// Geometric grid of smoothing parameters `2^0, 2^{-1}, ..., 2^{-13}`,
/// spanning `[1e-4, 1]`.
pub fn beta_grid() -> Vec<f64> {
    (0..=13).map(|k| 2f64.powi(-k)).collect()
}

/// Least-squares slope of `log y` against `log x` over the middle 60 percent
/// of the samples, which keeps discretization floors at the extreme
/// parameters out of the fit.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return Err(Error::DegenerateRegression(
            "need at least four samples".into(),
        ));
    }
    let skip = (xs.len() as f64 * 0.2).ceil() as usize;
    let keep = &xs[skip..xs.len() - skip];
    let keep_y = &ys[skip..xs.len() - skip];
    if keep.len() < 2 {
        return Err(Error::DegenerateRegression("window too small".into()));
    }
    let lx: Vec<f64> = keep.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = keep_y.iter().map(|y| y.ln()).collect();
    slope(&lx, &ly)
}

/// Plain least-squares slope.
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-30 {
        return Err(Error::DegenerateRegression("abscissae do not vary".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Boundedness report for `||S_beta G^p u||_inf` against the envelope
/// `beta^p / log(1/beta)`.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub betas: Vec<f64>,
    /// `||S_beta G^p u|| * log(1/beta) / beta^p` per grid point.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
}

/// Samples the companion decay on `G^p u` over the standard grid and
/// reports the ratio to the logarithmic envelope. For members of the
/// logarithmic smoothness class the ratio stays bounded; for Hoelder-smooth
/// `u` it decays.
pub fn low_order_decay(fam: &LavrentievFamily, u: &GridFunction, p: f64) -> Result<DecayReport> {
    if !(p >= 0.0) || p >= fam.p0() {
        return Err(Error::InvalidParameter(format!(
            "power must lie in [0, {}), got {p}",
            fam.p0()
        )));
    }
    let gp = apply_g_power(p, u)?;
    let betas = beta_grid();
    let mut ratios = Vec::with_capacity(betas.len());
    for &beta in &betas {
        let norm = companion_apply(fam, beta, &gp)?.max_norm();
        ratios.push(norm * (1.0 / beta).ln().max(1.0) / beta.powf(p));
    }
    let sup_ratio = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
    Ok(DecayReport {
        betas,
        ratios,
        sup_ratio,
    })
}
