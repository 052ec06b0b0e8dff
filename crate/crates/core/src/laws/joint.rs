//! Joint transform of `(R_y, Σ)`.
//!
//! Under the measure changed by `w`, `E[e^{-r R_y}]` is `v(x)/v(y)` for the
//! monotone solution `v` of `2x v'' + b v' = r v`, `b = δ + 4x w'/w`. The
//! equation is solved in Riccati form `g = v'/v` in `t = ln x`:
//! `dg/dt = (r - b g)/2 - x g²`, which stays bounded where `v` does not.

use super::kernel::log_w_derivative;
use super::transforms::laplace_sigma;
use super::{Branch, SigmaQuery};
use crate::bessel::Exact;
use crate::error::{BesqError, Result};
use crate::ode::{dopri5, OdeConfig};

/// Decay margin between the two solutions at the far starting point.
const LOG_SEPARATION: f64 = 30.0;

/// `E_x[exp(-r R_y - (λ/2) Σ)]`.
pub fn joint_r_sigma_laplace(q: &SigmaQuery<f64>, r: f64) -> Result<f64> {
    q.validate()?;
    let branch = q.branch()?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(BesqError::InvalidConfig(format!("r must be finite and >= 0, got {r}")));
    }
    if q.x == q.y {
        return Ok(1.0);
    }
    let base = laplace_sigma(q)?;
    if base == 0.0 || r == 0.0 {
        return Ok(base);
    }
    let params = q.params;
    let nu = params.nu();
    let delta = params.delta();
    let lambda = q.lambda;
    let drift = move |x: f64| -> f64 {
        let dlog = if lambda > 0.0 {
            log_w_derivative(&Exact, &params, x, lambda, branch).unwrap_or(f64::NAN)
        } else if branch == Branch::K && nu > 0.0 {
            // λ → 0 limit of the decreasing kernel is x^{-ν}
            -nu / x
        } else {
            0.0
        };
        delta + 4.0 * x * dlog
    };
    let rhs = |t: f64, s: &[f64; 2]| -> [f64; 2] {
        let x = t.exp();
        let g = s[0];
        [(r - drift(x) * g) / 2.0 - x * g * g, x * g]
    };
    let cfg = OdeConfig::default();
    let integral = match branch {
        Branch::K => {
            let x_max = far_start(q.x, r, &drift);
            let b = drift(x_max);
            let g0 = (-b - (b * b + 8.0 * x_max * r).sqrt()) / (4.0 * x_max);
            let at_x = dopri5(rhs, x_max.ln(), [g0, 0.0], q.x.ln(), &cfg)?;
            if q.y > 0.0 {
                dopri5(rhs, q.x.ln(), [at_x[0], 0.0], q.y.ln(), &cfg)?[1]
            } else {
                // near 0, x g ~ C x^{-ν}: close the tail analytically
                let eps = 1e-10 * q.x;
                let s = dopri5(rhs, q.x.ln(), [at_x[0], 0.0], eps.ln(), &cfg)?;
                s[1] - eps * s[0] / (-nu)
            }
        }
        Branch::I => {
            if delta <= 0.0 {
                return Err(BesqError::RegimeViolation(
                    "joint transform with R_y needs δ > 0 for upward passages (0 is absorbing at δ = 0)".into(),
                ));
            }
            let eps = 1e-10 * q.y;
            let g_eps = r / drift(eps);
            if q.x > eps {
                let at_x = dopri5(rhs, eps.ln(), [g_eps, 0.0], q.x.ln(), &cfg)?;
                dopri5(rhs, q.x.ln(), [at_x[0], 0.0], q.y.ln(), &cfg)?[1]
            } else {
                let head = g_eps * (eps - q.x);
                head + dopri5(rhs, eps.ln(), [g_eps, 0.0], q.y.ln(), &cfg)?[1]
            }
        }
    };
    if !integral.is_finite() {
        return Err(BesqError::Ode(format!("non-finite log-ratio {integral}")));
    }
    // K-branch: Φ(x)/Φ(y) = exp(∫_y^x g) and the integral above runs from x to y
    Ok((base * (-integral).exp()).clamp(0.0, 1.0))
}

/// Level beyond `x` where the recessive solution is separated from the
/// dominant one by `e^{LOG_SEPARATION}`.
fn far_start(x: f64, r: f64, drift: &impl Fn(f64) -> f64) -> f64 {
    let dt = 0.25;
    let mut t = x.ln();
    let mut acc = 0.0;
    for _ in 0..400 {
        let xi = t.exp();
        let b = drift(xi);
        acc += dt * (b * b + 8.0 * xi * r).sqrt() / 2.0;
        t += dt;
        if acc >= LOG_SEPARATION {
            break;
        }
    }
    t.exp()
}
