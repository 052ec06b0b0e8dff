//! The kernel ratios at complex transform variable, for contour inversion.
//! Here the variable is `s` with `E[exp(-s Σ)]`, i.e. `λ = 2s`.

use num_complex::Complex64 as C;

use super::{BesqParams, Branch, SigmaQuery};
use crate::cbessel::{log_i, log_k};
use crate::error::{BesqError, Result};
use crate::special::ln_gamma;

fn scale_c(params: &BesqParams<f64>, s: C) -> C {
    (2.0 * s).sqrt() / (params.p() + 1.0)
}

fn arg(params: &BesqParams<f64>, x: f64, s: C) -> C {
    scale_c(params, s) * (x.ln() * (params.p() + 1.0) / 2.0).exp()
}

fn log_w(params: &BesqParams<f64>, x: f64, s: C, branch: Branch) -> Result<C> {
    let nu = params.nu();
    match branch {
        Branch::K => {
            let alpha = params.order_k();
            if x == 0.0 {
                if nu < 0.0 {
                    let c = scale_c(params, s);
                    return Ok(C::new(ln_gamma(alpha) + (alpha - 1.0) * std::f64::consts::LN_2, 0.0) - c.ln() * alpha);
                }
                return Ok(C::new(f64::INFINITY, 0.0));
            }
            Ok(log_k(alpha, arg(params, x, s))? - nu / 2.0 * x.ln())
        }
        Branch::I => {
            let alpha = params.order_i();
            if x == 0.0 {
                let c = scale_c(params, s);
                return Ok((c / 2.0).ln() * alpha - ln_gamma(alpha + 1.0));
            }
            Ok(log_i(alpha, arg(params, x, s))? - nu / 2.0 * x.ln())
        }
    }
}

fn check_s(s: C) -> Result<()> {
    if !(s.re.is_finite() && s.im.is_finite()) || (s.im == 0.0 && s.re <= 0.0) {
        return Err(BesqError::InvalidConfig(format!("complex transform variable {s} on the cut")));
    }
    Ok(())
}

/// `ln E_x[exp(-s Σ)]` on an arbitrary branch; real part `-inf` when the
/// transform vanishes.
pub fn log_laplace_sigma_complex(params: &BesqParams<f64>, x: f64, y: f64, s: C) -> Result<C> {
    check_s(s)?;
    let branch = SigmaQuery::new(*params, x, y, 0.0)?.branch()?;
    if x == y {
        return Ok(C::new(0.0, 0.0));
    }
    let wy = log_w(params, y, s, branch)?;
    if wy.re.is_infinite() {
        return Ok(C::new(f64::NEG_INFINITY, 0.0));
    }
    Ok(log_w(params, x, s, branch)? - wy)
}

/// `w'(x)/w(x)` at complex `λ = 2s`.
fn w_log_derivative(params: &BesqParams<f64>, x: f64, s: C, branch: Branch) -> Result<C> {
    let z = arg(params, x, s);
    let a = params.p() + 1.0;
    match branch {
        Branch::I => {
            let alpha = params.order_i();
            Ok(a * z * (log_i(alpha + 1.0, z)? - log_i(alpha, z)?).exp() / (2.0 * x))
        }
        Branch::K => {
            let alpha = params.order_k();
            let nu = params.nu();
            let r = (log_k(alpha - 1.0, z)? - log_k(alpha, z)?).exp();
            Ok(-(nu + nu.abs()) / (2.0 * x) - a * z * r / (2.0 * x))
        }
    }
}

/// Complex counterpart of `jump_measure_transform`, as a function of `s = λ/2`.
pub fn jump_measure_transform_complex(
    params: &BesqParams<f64>,
    x: f64,
    s: C,
    dir: super::JumpDirection,
) -> Result<C> {
    check_s(s)?;
    let nu = params.nu();
    match dir {
        super::JumpDirection::Forward => {
            if nu < 0.0 {
                return Err(BesqError::RegimeViolation(format!("forward jump measure needs ν >= 0, got {nu}")));
            }
            if x == 0.0 {
                let p = params.p();
                let v = if p > 0.0 {
                    0.0
                } else if p == 0.0 {
                    1.0 / (2.0 * (nu + 1.0))
                } else {
                    f64::INFINITY
                };
                return Ok(C::new(v, 0.0));
            }
            Ok(w_log_derivative(params, x, s, Branch::I)? / s)
        }
        super::JumpDirection::Reversed => {
            if !(nu > 0.0 && nu <= 1.0) || !(0.0..1.0).contains(&x) {
                return Err(BesqError::RegimeViolation(format!(
                    "reversed jump measure needs 0 < ν <= 1 and 0 <= x < 1 (ν = {nu}, x = {x})"
                )));
            }
            let rev = BesqParams::new(-nu, params.p())?;
            Ok(-w_log_derivative(&rev, 1.0 - x, s, Branch::K)? / s)
        }
    }
}
