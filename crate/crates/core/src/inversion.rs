//! Numerical Laplace inversion: Gaver–Stehfest in extended precision and the
//! fixed Talbot contour in complex f64, plus a saddle-point Talbot variant that
//! works in log scale for distribution functions far below `f64::MIN_POSITIVE`.
//!
//! Transforms here are `f̂(s) = ∫₀^∞ e^{-st} f(t) dt`. The laws use `λ = 2s`.

use num_bigint::BigInt;
use num_complex::Complex64 as C;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::f64::consts::PI;

use crate::dd::DoubleDouble;
use crate::error::{BesqError, Result};
use crate::laws::{
    jump_measure_transform, jump_measure_transform_complex, laplace_sigma, log_laplace_sigma_complex, reversed_laplace,
    BesqParams, JumpDirection, SigmaQuery,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Method {
    GaverStehfest,
    Talbot,
}

/// Method, order (Gaver–Stehfest) or node count (Talbot), and working digits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InversionConfig {
    pub method: Method,
    pub order: usize,
    pub digits: u32,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self::gaver_stehfest(16)
    }
}

/// Largest useful Gaver–Stehfest order at the given working precision; the
/// weights grow like `10^{0.45 N}`.
pub fn max_gaver_stehfest_order(digits: u32) -> usize {
    2 * (digits as f64 / 2.2).floor() as usize
}

impl InversionConfig {
    pub fn gaver_stehfest(order: usize) -> Self {
        Self { method: Method::GaverStehfest, order, digits: DoubleDouble::DIGITS }
    }

    pub fn talbot(nodes: usize) -> Self {
        Self { method: Method::Talbot, order: nodes, digits: f64::DIGITS }
    }

    pub fn with_digits(self, digits: u32) -> Self {
        Self { digits, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::GaverStehfest => {
                if self.digits > DoubleDouble::DIGITS {
                    return Err(BesqError::InvalidConfig(format!(
                        "at most {} working digits are available, asked for {}",
                        DoubleDouble::DIGITS,
                        self.digits
                    )));
                }
                let cap = max_gaver_stehfest_order(self.digits);
                if self.order < 2 || self.order % 2 == 1 || self.order > cap {
                    return Err(BesqError::InvalidConfig(format!(
                        "Gaver–Stehfest order must be even, in [2, {cap}] at {} digits; got {}",
                        self.digits, self.order
                    )));
                }
            }
            Method::Talbot => {
                if self.order < 8 || self.order > 4096 {
                    return Err(BesqError::InvalidConfig(format!("Talbot needs 8..=4096 nodes, got {}", self.order)));
                }
            }
        }
        Ok(())
    }
}

/// A transform that can be evaluated at real points in any working precision
/// and at complex points in f64.
pub trait LaplaceTransform: Sync {
    fn real<S: Real>(&self, s: S) -> Result<S>;
    fn complex(&self, s: C) -> Result<C>;
}

/// A transform known through its logarithm; used where the transform itself
/// underflows.
pub trait LogLaplaceTransform: Sync {
    fn log_real(&self, s: f64) -> Result<f64>;
    fn log_complex(&self, s: C) -> Result<C>;
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact Stehfest weights `V_1..V_N`.
pub fn stehfest_weights(order: usize) -> Vec<BigRational> {
    let m = order / 2;
    (1..=order)
        .map(|k| {
            let mut acc = BigRational::zero();
            for j in k.div_ceil(2)..=k.min(m) {
                let num = BigInt::from(j).pow(m as u32) * factorial(2 * j);
                let den = factorial(m - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k);
                acc += BigRational::new(num, den);
            }
            if (k + m) % 2 == 1 {
                -acc
            } else {
                acc
            }
        })
        .collect()
}

fn gaver_stehfest<S: Real, T: LaplaceTransform + ?Sized>(f: &T, t: f64, order: usize) -> Result<f64> {
    let weights = stehfest_weights(order);
    let step = S::LN_2() / S::of(t);
    let mut acc = S::zero();
    for (k, v) in weights.iter().enumerate() {
        let s = step * S::of_usize(k + 1);
        let fs = f.real(s)?;
        if !fs.is_finite() {
            return Err(BesqError::Overflow(fs.f64()));
        }
        acc += S::from_ratio(v) * fs;
    }
    let out = (acc * step).f64();
    if !out.is_finite() {
        return Err(BesqError::Overflow(out));
    }
    Ok(out)
}

fn talbot<T: LaplaceTransform + ?Sized>(f: &T, t: f64, nodes: usize) -> Result<f64> {
    let m = nodes as f64;
    let r = 2.0 * m / (5.0 * t);
    let mut acc = 0.5 * f.complex(C::new(r, 0.0))?.re * (r * t).exp();
    for k in 1..nodes {
        let theta = k as f64 * PI / m;
        let cot = 1.0 / theta.tan();
        let s = C::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let fs = f.complex(s)?;
        acc += ((s * t).exp() * fs * C::new(1.0, sigma)).re;
    }
    let out = r / m * acc;
    if !out.is_finite() {
        return Err(BesqError::Overflow(out));
    }
    Ok(out)
}

/// `f(t)` from its transform.
pub fn invert<T: LaplaceTransform + ?Sized>(f: &T, t: f64, cfg: &InversionConfig) -> Result<f64> {
    cfg.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(BesqError::InvalidConfig(format!("inversion abscissa must be finite and > 0, got {t}")));
    }
    match cfg.method {
        Method::Talbot => talbot(f, t, cfg.order),
        Method::GaverStehfest => match cfg.digits {
            0..=6 => gaver_stehfest::<f32, T>(f, t, cfg.order),
            7..=15 => gaver_stehfest::<f64, T>(f, t, cfg.order),
            _ => gaver_stehfest::<DoubleDouble, T>(f, t, cfg.order),
        },
    }
}

/// Two inversions and their gap.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CrossChecked {
    pub value: f64,
    pub alternate: f64,
    pub discrepancy: f64,
}

/// Inverts with both configurations; `Unstable` when they differ by more than
/// `tol` (absolute).
pub fn invert_cross_checked<T: LaplaceTransform + ?Sized>(
    f: &T,
    t: f64,
    primary: &InversionConfig,
    secondary: &InversionConfig,
    tol: f64,
) -> Result<CrossChecked> {
    let value = invert(f, t, primary)?;
    let alternate = invert(f, t, secondary)?;
    let discrepancy = (value - alternate).abs();
    if discrepancy > tol {
        return Err(BesqError::Unstable(format!(
            "methods disagree at t = {t}: {value:e} vs {alternate:e} (gap {discrepancy:e} > {tol:e})"
        )));
    }
    Ok(CrossChecked { value, alternate, discrepancy })
}

/// `E_x[exp(-s Σ_{x→y})]`; its inverse is the density of `Σ`.
#[derive(Debug, Clone, Copy)]
pub struct SigmaTransform {
    pub params: BesqParams<f64>,
    pub x: f64,
    pub y: f64,
}

impl LaplaceTransform for SigmaTransform {
    fn real<S: Real>(&self, s: S) -> Result<S> {
        let q = SigmaQuery::new(self.params.cast::<S>(), S::of(self.x), S::of(self.y), S::of(2.0) * s)?;
        laplace_sigma(&q)
    }
    fn complex(&self, s: C) -> Result<C> {
        Ok(log_laplace_sigma_complex(&self.params, self.x, self.y, s)?.exp())
    }
}

impl LogLaplaceTransform for SigmaTransform {
    fn log_real(&self, s: f64) -> Result<f64> {
        Ok(log_laplace_sigma_complex(&self.params, self.x, self.y, C::new(s, 0.0))?.re)
    }
    fn log_complex(&self, s: C) -> Result<C> {
        log_laplace_sigma_complex(&self.params, self.x, self.y, s)
    }
}

/// `f̂(s)/s`: inverts to the distribution function.
#[derive(Debug, Clone, Copy)]
pub struct CdfOf<T>(pub T);

impl<T: LaplaceTransform> LaplaceTransform for CdfOf<T> {
    fn real<S: Real>(&self, s: S) -> Result<S> {
        Ok(self.0.real(s)? / s)
    }
    fn complex(&self, s: C) -> Result<C> {
        Ok(self.0.complex(s)? / s)
    }
}

impl<T: LogLaplaceTransform> LogLaplaceTransform for CdfOf<T> {
    fn log_real(&self, s: f64) -> Result<f64> {
        Ok(self.0.log_real(s)? - s.ln())
    }
    fn log_complex(&self, s: C) -> Result<C> {
        Ok(self.0.log_complex(s)? - s.ln())
    }
}

/// `∫ e^{-sb} π(x, b) db` for the jump density in the given direction.
#[derive(Debug, Clone, Copy)]
pub struct JumpTransform {
    pub params: BesqParams<f64>,
    pub x: f64,
    pub direction: JumpDirection,
}

impl LaplaceTransform for JumpTransform {
    fn real<S: Real>(&self, s: S) -> Result<S> {
        jump_measure_transform(&self.params.cast::<S>(), S::of(self.x), S::of(2.0) * s, self.direction)
    }
    fn complex(&self, s: C) -> Result<C> {
        jump_measure_transform_complex(&self.params, self.x, s, self.direction)
    }
}

/// `E[exp(-s Z_x)]` for the time-reversed functional.
#[derive(Debug, Clone, Copy)]
pub struct ReversedTransform {
    pub params: BesqParams<f64>,
    pub x: f64,
}

impl LaplaceTransform for ReversedTransform {
    fn real<S: Real>(&self, s: S) -> Result<S> {
        reversed_laplace(&self.params.cast::<S>(), S::of(self.x), s)
    }
    fn complex(&self, s: C) -> Result<C> {
        let rev = BesqParams::new(-self.params.nu(), self.params.p())?;
        Ok(log_laplace_sigma_complex(&rev, 1.0, 1.0 - self.x, s)?.exp())
    }
}

/// Closed-form transform pairs used to validate both methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticPair {
    /// `1/s ↔ 1`
    Constant,
    /// `1/(s+a) ↔ e^{-at}`
    Exponential(f64),
    /// `1/s² ↔ t`
    Ramp,
    /// `1/(s+1)² ↔ t e^{-t}`
    Gamma2,
    /// `e^{-ℓ√(2s)} ↔ ℓ (2πt³)^{-1/2} e^{-ℓ²/(2t)}`, the Brownian hitting density
    BrownianHitting(f64),
    /// `s^{-1/2} ↔ (πt)^{-1/2}`
    InverseSqrt,
}

impl AnalyticPair {
    pub fn library() -> [AnalyticPair; 6] {
        [
            AnalyticPair::Constant,
            AnalyticPair::Exponential(1.0),
            AnalyticPair::Ramp,
            AnalyticPair::Gamma2,
            AnalyticPair::BrownianHitting(1.0),
            AnalyticPair::InverseSqrt,
        ]
    }

    pub fn original(&self, t: f64) -> f64 {
        match *self {
            AnalyticPair::Constant => 1.0,
            AnalyticPair::Exponential(a) => (-a * t).exp(),
            AnalyticPair::Ramp => t,
            AnalyticPair::Gamma2 => t * (-t).exp(),
            AnalyticPair::BrownianHitting(l) => crate::laws::brownian_hitting_density(l, t),
            AnalyticPair::InverseSqrt => 1.0 / (PI * t).sqrt(),
        }
    }
}

impl LaplaceTransform for AnalyticPair {
    fn real<S: Real>(&self, s: S) -> Result<S> {
        let one = S::one();
        Ok(match *self {
            AnalyticPair::Constant => one / s,
            AnalyticPair::Exponential(a) => one / (s + S::of(a)),
            AnalyticPair::Ramp => one / (s * s),
            AnalyticPair::Gamma2 => one / ((s + one) * (s + one)),
            AnalyticPair::BrownianHitting(l) => (-S::of(l) * (S::of(2.0) * s).sqrt()).exp(),
            AnalyticPair::InverseSqrt => one / s.sqrt(),
        })
    }
    fn complex(&self, s: C) -> Result<C> {
        let one = C::new(1.0, 0.0);
        Ok(match *self {
            AnalyticPair::Constant => one / s,
            AnalyticPair::Exponential(a) => one / (s + a),
            AnalyticPair::Ramp => one / (s * s),
            AnalyticPair::Gamma2 => one / ((s + 1.0) * (s + 1.0)),
            AnalyticPair::BrownianHitting(l) => (-l * (2.0 * s).sqrt()).exp(),
            AnalyticPair::InverseSqrt => one / s.sqrt(),
        })
    }
}

/// `Q_x[Σ_{x→y} <= t]`.
pub fn cdf_sigma(params: &BesqParams<f64>, x: f64, y: f64, t: f64, cfg: &InversionConfig) -> Result<f64> {
    SigmaQuery::new(*params, x, y, 0.0)?.branch()?;
    if x == y {
        return Ok(1.0);
    }
    let v = invert(&CdfOf(SigmaTransform { params: *params, x, y }), t, cfg)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Density of `Σ_{x→y}` at `t`.
pub fn density_sigma(params: &BesqParams<f64>, x: f64, y: f64, t: f64, cfg: &InversionConfig) -> Result<f64> {
    SigmaQuery::new(*params, x, y, 0.0)?.branch()?;
    invert(&SigmaTransform { params: *params, x, y }, t, cfg)
}

/// Jump density `π(x, b)`.
pub fn jump_density(
    params: &BesqParams<f64>,
    x: f64,
    b: f64,
    direction: JumpDirection,
    cfg: &InversionConfig,
) -> Result<f64> {
    invert(&JumpTransform { params: *params, x, direction }, b, cfg)
}

/// `ln f(t)` by a Talbot contour pinned at the saddle point of `e^{st} f̂(s)` on
/// the real axis; nodes are doubled until two successive estimates agree to
/// `tol`.
pub fn log_invert_saddle<T: LogLaplaceTransform + ?Sized>(f: &T, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(BesqError::InvalidConfig(format!("inversion abscissa must be finite and > 0, got {t}")));
    }
    // t s + ln f̂(s) is convex in s for a transform of a nonnegative function
    let phase = |u: f64| -> f64 {
        let s = u.exp();
        match f.log_real(s) {
            Ok(v) => s * t + v,
            Err(_) => f64::INFINITY,
        }
    };
    let u0 = -t.ln();
    let (mut lo, mut hi) = (u0 - 15.0, u0 + 45.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fa, mut fb) = (phase(a), phase(b));
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = phase(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = phase(b);
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    let r = (0.5 * (lo + hi)).exp();
    let m0 = r * t + f.log_real(r)?;
    if !m0.is_finite() {
        return Err(BesqError::Unstable(format!("no finite saddle point at t = {t}")));
    }
    let estimate = |nodes: usize| -> Result<f64> {
        let m = nodes as f64;
        let mut acc = 0.5;
        for k in 1..nodes {
            let theta = k as f64 * PI / m;
            let cot = 1.0 / theta.tan();
            let s = C::new(r * theta * cot, r * theta);
            let sigma = theta + (theta * cot - 1.0) * cot;
            let e = s * t + f.log_complex(s)? - m0;
            if e.re < -745.0 {
                continue;
            }
            acc += (e.exp() * C::new(1.0, sigma)).re;
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(BesqError::Unstable(format!("saddle contour sum {acc} is not positive at t = {t}")));
        }
        Ok(m0 + (r / m).ln() + acc.ln())
    };
    let mut nodes = 64;
    let mut prev = estimate(nodes)?;
    while nodes < 16384 {
        nodes *= 2;
        let next = estimate(nodes)?;
        if (next - prev).abs() <= tol * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(BesqError::Unstable(format!("saddle contour did not settle at t = {t}")))
}

/// `ln Q_x[Σ_{x→y} <= t]`, usable deep in the small-ball regime.
pub fn log_cdf_sigma(params: &BesqParams<f64>, x: f64, y: f64, t: f64) -> Result<f64> {
    SigmaQuery::new(*params, x, y, 0.0)?.branch()?;
    if x == y {
        return Ok(0.0);
    }
    log_invert_saddle(&CdfOf(SigmaTransform { params: *params, x, y }), t, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn weights_sum_to_zero_and_match_known_values() {
        for n in [2, 8, 16, 24] {
            let w = stehfest_weights(n);
            assert!(w.iter().fold(BigRational::zero(), |a, b| a + b).is_zero(), "order {n}");
        }
        // N = 4: 2, -26, 48, -24
        let w = stehfest_weights(4);
        assert_eq!(w, vec![ratio(-2, 1), ratio(26, 1), ratio(-48, 1), ratio(24, 1)]);
    }

    #[test]
    fn config_caps() {
        assert!(InversionConfig::gaver_stehfest(16).validate().is_ok());
        assert!(InversionConfig::gaver_stehfest(15).validate().is_err());
        assert!(InversionConfig::gaver_stehfest(16).with_digits(15).validate().is_err());
        assert!(InversionConfig::gaver_stehfest(12).with_digits(15).validate().is_ok());
        assert!(InversionConfig::gaver_stehfest(16).with_digits(40).validate().is_err());
        assert!(InversionConfig::talbot(4).validate().is_err());
    }

    #[test]
    fn examples() {
        let gs = InversionConfig::gaver_stehfest(28);
        let tb = InversionConfig::talbot(24);
        for cfg in [gs, tb] {
            assert!((invert(&AnalyticPair::Constant, 0.7, &cfg).unwrap() - 1.0).abs() < 1e-8);
            assert!((invert(&AnalyticPair::Exponential(1.0), 1.0, &cfg).unwrap() - (-1.0f64).exp()).abs() < 1e-8);
            let v = invert(&AnalyticPair::BrownianHitting(1.0), 1.0, &cfg).unwrap();
            assert!((v - 0.241970724519143349797830149938).abs() < 1e-7, "{cfg:?}: {v}");
        }
    }

    #[test]
    fn cross_check_reports_instability() {
        let gs = InversionConfig::gaver_stehfest(4);
        let tb = InversionConfig::talbot(32);
        let e = invert_cross_checked(&AnalyticPair::Gamma2, 1.0, &gs, &tb, 1e-12).unwrap_err();
        assert!(matches!(e, BesqError::Unstable(_)));
    }

    #[test]
    fn saddle_inversion_of_a_known_tail() {
        // 1/s · e^{-√(2s)} inverts to erfc(1/√(2t))
        struct Hit;
        impl LogLaplaceTransform for Hit {
            fn log_real(&self, s: f64) -> Result<f64> {
                Ok(-(2.0 * s).sqrt() - s.ln())
            }
            fn log_complex(&self, s: C) -> Result<C> {
                Ok(-(2.0 * s).sqrt() - s.ln())
            }
        }
        for &t in &[0.5, 0.05, 0.01] {
            let got = log_invert_saddle(&Hit, t, 1e-12).unwrap();
            let want = libm::erfc(1.0 / (2.0 * t).sqrt()).ln();
            assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "{t}: {got} vs {want}");
        }
        // deep tail: ln erfc(x) ≈ -x² - ln(x√π) + ln(1 - 1/(2x²) + 3/(4x⁴))
        let t: f64 = 1e-4;
        let x = 1.0 / (2.0 * t).sqrt();
        let want = -x * x - (x * PI.sqrt()).ln() + (1.0 - 0.5 / (x * x) + 0.75 / x.powi(4)).ln();
        let got = log_invert_saddle(&Hit, t, 1e-12).unwrap();
        assert!((got - want).abs() < 1e-6 * want.abs(), "{got} vs {want}");
    }
}
