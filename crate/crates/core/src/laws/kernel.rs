//! The kernel `w(x) = x^{-ν/2} B(c x^{(p+1)/2})`, `c = √λ/(p+1)`, where `B` is
//! `K_{|ν|/(p+1)}` on the decreasing branch and `I_{ν/(p+1)}` on the increasing
//! one. `w(X_t)` times the exponential of the accumulated functional is a local
//! martingale, so every transform below is a ratio of kernel values.

use super::{BesqParams, Branch};
use crate::bessel::BesselSource;
use crate::error::{BesqError, Result};
use crate::scalar::Real;
use crate::special::ln_gamma;

pub(crate) fn scale_c<S: Real>(params: &BesqParams<S>, lambda: S) -> S {
    lambda.sqrt() / (params.p() + S::one())
}

/// Bessel argument at level `x`.
pub(crate) fn bessel_arg<S: Real>(params: &BesqParams<S>, x: S, lambda: S) -> S {
    if x.is_zero() {
        return S::zero();
    }
    scale_c(params, lambda) * (x.ln() * (params.p() + S::one()) / S::of(2.0)).exp()
}

/// `ln w(x)` with the standard Bessel normalization; `+inf` where the kernel
/// blows up (decreasing branch at 0 with `ν >= 0`).
pub fn kernel_w<S: Real, B: BesselSource<S> + ?Sized>(
    bessel: &B,
    params: &BesqParams<S>,
    x: S,
    lambda: S,
    branch: Branch,
) -> Result<S> {
    if !(lambda > S::zero()) || !lambda.is_finite() {
        return Err(BesqError::InvalidConfig(format!("kernel needs 0 < λ < inf, got {lambda}")));
    }
    if !(x >= S::zero()) || !x.is_finite() {
        return Err(BesqError::InvalidConfig(format!("kernel level must be finite and >= 0, got {x}")));
    }
    let nu = params.nu();
    let c = scale_c(params, lambda);
    match branch {
        Branch::K => {
            let alpha = params.order_k();
            if x.is_zero() {
                if nu < S::zero() {
                    // K_α(z) ~ Γ(α) 2^{α-1} z^{-α} cancels the prefactor
                    return Ok(ln_gamma(alpha) + (alpha - S::one()) * S::LN_2() - alpha * c.ln());
                }
                return Ok(S::infinity());
            }
            let z = bessel_arg(params, x, lambda);
            Ok(-nu / S::of(2.0) * x.ln() + bessel.log_k(alpha, z)?)
        }
        Branch::I => {
            let alpha = params.order_i();
            if alpha <= -S::one() {
                return Err(BesqError::RegimeViolation(format!(
                    "increasing kernel needs ν/(p+1) > -1, got {alpha}"
                )));
            }
            if x.is_zero() {
                // I_α(z) ~ (z/2)^α / Γ(α+1)
                return Ok(alpha * (c / S::of(2.0)).ln() - ln_gamma(alpha + S::one()));
            }
            let z = bessel_arg(params, x, lambda);
            Ok(-nu / S::of(2.0) * x.ln() + bessel.log_i(alpha, z)?)
        }
    }
}

/// `w'(x) / w(x)` for `x > 0`.
///
/// Increasing branch: `(p+1) z I_{α+1}(z) / (2x I_α(z))`.
/// Decreasing branch: `-(ν + |ν|)/(2x) - (p+1) z K_{α-1}(z) / (2x K_α(z))`.
pub fn log_w_derivative<S: Real, B: BesselSource<S> + ?Sized>(
    bessel: &B,
    params: &BesqParams<S>,
    x: S,
    lambda: S,
    branch: Branch,
) -> Result<S> {
    if !(x > S::zero()) || !(lambda > S::zero()) {
        return Err(BesqError::InvalidConfig(format!("log-derivative needs x > 0, λ > 0 (x = {x}, λ = {lambda})")));
    }
    let a = params.p() + S::one();
    let z = bessel_arg(params, x, lambda);
    let two_x = S::of(2.0) * x;
    match branch {
        Branch::I => {
            let alpha = params.order_i();
            let r = (bessel.log_i(alpha + S::one(), z)? - bessel.log_i(alpha, z)?).exp();
            Ok(a * z * r / two_x)
        }
        Branch::K => {
            let alpha = params.order_k();
            let r = (bessel.log_k(alpha - S::one(), z)? - bessel.log_k(alpha, z)?).exp();
            let nu = params.nu();
            Ok(-(nu + nu.abs()) / two_x - a * z * r / two_x)
        }
    }
}

/// `ln(I_α / K_α)` at `z`, with `α = |ν|/(p+1)`; `-inf` at `z = 0`.
pub(crate) fn log_i_over_k<S: Real, B: BesselSource<S> + ?Sized>(bessel: &B, alpha: S, z: S) -> Result<S> {
    if z.is_zero() {
        return Ok(S::neg_infinity());
    }
    Ok(bessel.log_i(alpha, z)? - bessel.log_k(alpha, z)?)
}

/// `ln(K_α / I_α)` at `z` for `α > -1`. At `z = 0` the ratio is finite only
/// for `α < 0`, where it equals `π / (2 sin(π|α|))`.
pub(crate) fn log_k_over_i<S: Real, B: BesselSource<S> + ?Sized>(bessel: &B, alpha: S, z: S) -> Result<S> {
    if z.is_zero() {
        if alpha < S::zero() {
            return Ok((S::PI() / (S::of(2.0) * (S::PI() * alpha.abs()).sin())).ln());
        }
        return Ok(S::infinity());
    }
    Ok(bessel.log_k(alpha, z)? - bessel.log_i(alpha, z)?)
}
