//! The slowly varying functions that calibrate logarithmic convergence
//! rates: `phi(t) = 1 / log(1/t)` and `chi_{+-1, q}(t) = t^q log(1/t)^{-+1}`,
//! together with a high-precision inverse of the increasing branch.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiSign {
    /// `chi_{+1, q}(t) = t^q / log(1/t)`, increasing on all of `(0, 1)`.
    Plus,
    /// `chi_{-1, q}(t) = t^q log(1/t)`, increasing on `(0, e^(-1/q)]`.
    Minus,
}

fn check_open_unit(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "argument must lie in (0, 1), got {t}"
        )));
    }
    Ok(())
}

/// `phi(t) = 1 / log(1/t)` on `(0, 1)`.
pub fn phi(t: f64) -> Result<f64> {
    check_open_unit(t)?;
    Ok(1.0 / (1.0 / t).ln())
}

/// `chi_{sign, q}(t) = t^q log(1/t)^(-sign)` on `(0, 1)`; for `sign = +1`
/// and `q = 0` this is `phi`.
pub fn chi(sign: ChiSign, q: f64, t: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent must be >= 0, got {q}"
        )));
    }
    check_open_unit(t)?;
    let log = (1.0 / t).ln();
    Ok(match sign {
        ChiSign::Plus => t.powf(q) / log,
        ChiSign::Minus => t.powf(q) * log,
    })
}

/// Inverts `chi_{+1, q}` on `(0, 1)` by bisection in `log t`, to about
/// twelve significant digits in `t`.
pub fn chi_inverse(q: f64, s: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent must be positive, got {q}"
        )));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target must be positive and finite, got {s}"
        )));
    }
    // chi_{+1,q} is increasing with limits 0 and +infinity, so a root
    // exists for every positive target; bisect y = ln t
    let mut lo = -700.0f64;
    let mut hi = -1e-14f64;
    let value = |y: f64| {
        let t = y.exp();
        t.powf(q) / (-y)
    };
    if value(lo) > s {
        return Err(Error::InvalidParameter(format!(
            "target {s} below the representable range of the inverse"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
