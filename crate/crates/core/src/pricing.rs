//! Options on accumulated interest `Σ` in the rate model `X^p`, discounted by
//! `exp(-Σ)` at the payment time `R_y`.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{BesqError, Result};
use crate::inversion::{invert, log_invert_saddle, InversionConfig, LaplaceTransform, LogLaplaceTransform};
use crate::laws::{joint_max_laplace, laplace_sigma, log_laplace_sigma_complex, BarrierQuery, BesqParams, SigmaQuery};
use crate::quad::{integrate, QuadConfig};
use crate::scalar::Real;
use crate::simulate::{run_paths, Estimate, PathConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptionKind {
    /// Pays 1 if `Σ <= k`.
    Digital { k: f64 },
    /// Payoff `(K - e^Σ)⁺`.
    PutAccumulated { strike: f64 },
    /// Payoff `(K - max X)⁺`, with the maximum over `[0, R_y]`.
    PutMaxRate { strike: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptionSpec {
    pub kind: OptionKind,
    #[serde(skip)]
    pub params: BesqParams<f64>,
    pub x: f64,
    pub y: f64,
}

impl OptionSpec {
    pub fn validate(&self) -> Result<()> {
        SigmaQuery::new(self.params, self.x, self.y, 0.0)?.branch()?;
        match self.kind {
            OptionKind::Digital { k } if !(k >= 0.0) => {
                Err(BesqError::InvalidConfig(format!("digital threshold must be >= 0, got {k}")))
            }
            OptionKind::PutAccumulated { strike } if !(strike >= 1.0 && strike.is_finite()) => {
                Err(BesqError::InvalidConfig(format!("strike must be finite and >= 1, got {strike}")))
            }
            OptionKind::PutMaxRate { strike } if !(self.y < self.x && self.x <= strike && strike.is_finite()) => {
                Err(BesqError::Orientation(format!(
                    "max-rate put needs y < x <= K, got y = {}, x = {}, K = {strike}",
                    self.y, self.x
                )))
            }
            _ => Ok(()),
        }
    }
}

/// `∫₀^∞ e^{-μk} D(k) dk = E[exp(-(μ+1) Σ)] / μ`.
#[derive(Debug, Clone, Copy)]
pub struct DigitalTransform {
    pub params: BesqParams<f64>,
    pub x: f64,
    pub y: f64,
}

impl LaplaceTransform for DigitalTransform {
    fn real<S: Real>(&self, mu: S) -> Result<S> {
        let lambda = S::of(2.0) * (mu + S::one());
        let q = SigmaQuery::new(self.params.cast::<S>(), S::of(self.x), S::of(self.y), lambda)?;
        Ok(laplace_sigma(&q)? / mu)
    }
    fn complex(&self, mu: C) -> Result<C> {
        Ok(log_laplace_sigma_complex(&self.params, self.x, self.y, mu + 1.0)?.exp() / mu)
    }
}

impl LogLaplaceTransform for DigitalTransform {
    fn log_real(&self, mu: f64) -> Result<f64> {
        Ok(log_laplace_sigma_complex(&self.params, self.x, self.y, C::new(mu + 1.0, 0.0))?.re - mu.ln())
    }
    fn log_complex(&self, mu: C) -> Result<C> {
        Ok(log_laplace_sigma_complex(&self.params, self.x, self.y, mu + 1.0)? - mu.ln())
    }
}

/// `D(k) = E[1{Σ <= k} exp(-Σ)]`.
pub fn price_digital(params: &BesqParams<f64>, x: f64, y: f64, k: f64, cfg: &InversionConfig) -> Result<f64> {
    OptionSpec { kind: OptionKind::Digital { k }, params: *params, x, y }.validate()?;
    if x == y {
        return Ok(1.0);
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    if k.is_infinite() {
        return laplace_sigma(&SigmaQuery::new(*params, x, y, 2.0)?);
    }
    Ok(invert(&DigitalTransform { params: *params, x, y }, k, cfg)?.clamp(0.0, 1.0))
}

/// `ln D(k)` by saddle-point inversion; usable where `D` underflows.
pub fn log_price_digital(params: &BesqParams<f64>, x: f64, y: f64, k: f64) -> Result<f64> {
    OptionSpec { kind: OptionKind::Digital { k }, params: *params, x, y }.validate()?;
    if x == y {
        return Ok(0.0);
    }
    if k == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(log_invert_saddle(&DigitalTransform { params: *params, x, y }, k, 1e-10)?.min(0.0))
}

fn put_quad() -> QuadConfig {
    QuadConfig { abs_tol: 1e-10, rel_tol: 1e-8, max_intervals: 200 }
}

/// `E[exp(-Σ) (K - e^Σ)⁺] = ∫₀^{ln K} e^u D(u) du`.
pub fn price_put_accumulated(params: &BesqParams<f64>, x: f64, y: f64, strike: f64, cfg: &InversionConfig) -> Result<f64> {
    OptionSpec { kind: OptionKind::PutAccumulated { strike }, params: *params, x, y }.validate()?;
    if strike == 1.0 {
        return Ok(0.0);
    }
    if x == y {
        return Ok(strike - 1.0);
    }
    let f = DigitalTransform { params: *params, x, y };
    let failure = std::sync::Mutex::new(None);
    let r = integrate(
        |u: f64| match invert(&f, u, cfg) {
            Ok(d) => u.exp() * d.clamp(0.0, 1.0),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        strike.ln(),
        &put_quad(),
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(r?.value.clamp(0.0, strike - 1.0))
}

/// The put from the log-scale digital; accurate for strikes close to 1, where
/// the price is far below the absolute resolution of [`price_put_accumulated`].
pub fn price_put_accumulated_log(params: &BesqParams<f64>, x: f64, y: f64, strike: f64) -> Result<f64> {
    OptionSpec { kind: OptionKind::PutAccumulated { strike }, params: *params, x, y }.validate()?;
    if strike == 1.0 {
        return Ok(0.0);
    }
    let failure = std::sync::Mutex::new(None);
    let r = integrate(
        |u: f64| match log_price_digital(params, x, y, u) {
            Ok(l) => (u + l).exp(),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        strike.ln(),
        &QuadConfig { abs_tol: 0.0, rel_tol: 1e-8, max_intervals: 200 },
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(r?.value)
}

/// `lim_{K↓1} ln K · ln P(K) = -(x^{(p+1)/2} - y^{(p+1)/2})² / (2(p+1)²)`.
pub fn small_strike_asymptote(params: &BesqParams<f64>, x: f64, y: f64) -> f64 {
    let a = params.p() + 1.0;
    let d = x.powf(a / 2.0) - y.powf(a / 2.0);
    -d * d / (2.0 * a * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallStrikePoint {
    pub log_strike: f64,
    pub price: f64,
    /// `ln K · ln P(K)`.
    pub scaled: f64,
}

pub fn small_strike_series(params: &BesqParams<f64>, x: f64, y: f64, log_strikes: &[f64]) -> Result<Vec<SmallStrikePoint>> {
    log_strikes
        .iter()
        .map(|&l| {
            let price = price_put_accumulated_log(params, x, y, l.exp())?;
            Ok(SmallStrikePoint { log_strike: l, price, scaled: l * price.ln() })
        })
        .collect()
}

/// `E[exp(-Σ) (K - max X)⁺] = ∫_x^K E[exp(-Σ); max X < a] da` for `y < x < K`.
pub fn price_put_max_rate(params: &BesqParams<f64>, x: f64, y: f64, strike: f64) -> Result<f64> {
    OptionSpec { kind: OptionKind::PutMaxRate { strike }, params: *params, x, y }.validate()?;
    if strike == x {
        return Ok(0.0);
    }
    let base = SigmaQuery::new(*params, x, y, 2.0)?;
    let failure = std::sync::Mutex::new(None);
    let r = integrate(
        |a: f64| match BarrierQuery::new(base, a).and_then(|bq| joint_max_laplace(&bq)) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        x,
        strike,
        &QuadConfig::tol(1e-12, 1e-10),
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(r?.value)
}

/// Both sides of the identity `∫₀^z e^u D(u) du = Q[Σ <= z]`, which does not
/// hold in general; exposed so the gap can be measured.
pub fn digital_identity_sides(params: &BesqParams<f64>, x: f64, y: f64, z: f64, cfg: &InversionConfig) -> Result<(f64, f64)> {
    let lhs = price_put_accumulated(params, x, y, z.exp(), cfg)?;
    let rhs = crate::inversion::cdf_sigma(params, x, y, z, cfg)?;
    Ok((lhs, rhs))
}

pub fn price(spec: &OptionSpec, cfg: &InversionConfig) -> Result<f64> {
    spec.validate()?;
    let OptionSpec { params, x, y, .. } = *spec;
    match spec.kind {
        OptionKind::Digital { k } => price_digital(&params, x, y, k, cfg),
        OptionKind::PutAccumulated { strike } => price_put_accumulated(&params, x, y, strike, cfg),
        OptionKind::PutMaxRate { strike } => price_put_max_rate(&params, x, y, strike),
    }
}

/// Monte Carlo price; censored paths pay nothing.
pub fn mc_price(spec: &OptionSpec, cfg: &PathConfig) -> Result<Estimate> {
    spec.validate()?;
    let batch = run_paths(&spec.params, spec.x, spec.y, cfg)?;
    let kind = spec.kind;
    Ok(batch.mean(move |r| {
        if r.censored() {
            return 0.0;
        }
        let disc = (-r.sigma).exp();
        match kind {
            OptionKind::Digital { k } => if r.sigma <= k { disc } else { 0.0 },
            OptionKind::PutAccumulated { strike } => (strike * disc - 1.0).max(0.0),
            OptionKind::PutMaxRate { strike } => disc * (strike - r.max_level).max(0.0),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::HalfOrder;

    fn pr() -> BesqParams<f64> {
        BesqParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn digital_limits_and_monotone() {
        let cfg = InversionConfig::gaver_stehfest(28);
        let full = laplace_sigma(&SigmaQuery::new(pr(), 0.0, 1.0, 2.0).unwrap()).unwrap();
        let big = price_digital(&pr(), 0.0, 1.0, 5.0, &cfg).unwrap();
        assert!((big - full).abs() < 1e-7, "{big} vs {full}");
        assert!(price_digital(&pr(), 0.0, 1.0, 1e-3, &cfg).unwrap() <= 1e-4);
        let ks = [0.02, 0.05, 0.1, 0.2, 0.4];
        let d: Vec<f64> = ks.iter().map(|&k| price_digital(&pr(), 0.0, 1.0, k, &cfg).unwrap()).collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        let tb = price_digital(&pr(), 0.0, 1.0, 0.1, &InversionConfig::talbot(24)).unwrap();
        assert!((tb - d[2]).abs() < 1e-6);
    }

    #[test]
    fn digital_below_cdf() {
        let cfg = InversionConfig::gaver_stehfest(28);
        for u in [0.05, 0.1, 0.3] {
            let d = price_digital(&pr(), 0.0, 1.0, u, &cfg).unwrap();
            let f = crate::inversion::cdf_sigma(&pr(), 0.0, 1.0, u, &cfg).unwrap();
            assert!(d <= f + 1e-9);
        }
    }

    #[test]
    fn log_digital_agrees() {
        let cfg = InversionConfig::talbot(24);
        for k in [0.05, 0.1, 0.3] {
            let d = price_digital(&pr(), 0.0, 1.0, k, &cfg).unwrap();
            let l = log_price_digital(&pr(), 0.0, 1.0, k).unwrap();
            assert!((l.exp() - d).abs() < 1e-8, "{k}: {} vs {d}", l.exp());
        }
    }

    #[test]
    fn put_bounds_and_trivial_strike() {
        let cfg = InversionConfig::gaver_stehfest(28);
        assert_eq!(price_put_accumulated(&pr(), 0.0, 1.0, 1.0, &cfg).unwrap(), 0.0);
        let full = laplace_sigma(&SigmaQuery::new(pr(), 0.0, 1.0, 2.0).unwrap()).unwrap();
        let mut last = 0.0;
        for k in [1.05, 1.2, 2.0, 5.0] {
            let p = price_put_accumulated(&pr(), 0.0, 1.0, k, &cfg).unwrap();
            assert!(p > last && p <= k * full && p <= k - 1.0);
            last = p;
        }
        // derivative in ln K recovers e^u D(u)
        let (u, h) = (0.3f64, 1e-3);
        let dp = (price_put_accumulated(&pr(), 0.0, 1.0, (u + h).exp(), &cfg).unwrap()
            - price_put_accumulated(&pr(), 0.0, 1.0, (u - h).exp(), &cfg).unwrap())
            / (2.0 * h);
        let want = u.exp() * price_digital(&pr(), 0.0, 1.0, u, &cfg).unwrap();
        assert!((dp - want).abs() < 1e-5, "{dp} vs {want}");
        assert!(price_put_accumulated(&pr(), 0.0, 1.0, 0.5, &cfg).is_err());
    }

    #[test]
    fn log_put_agrees() {
        let b = price_put_accumulated_log(&pr(), 0.0, 1.0, 1.2).unwrap();
        // Talbot is limited by roundoff, Gaver–Stehfest by its order cap
        for (cfg, tol) in [(InversionConfig::talbot(24), 1e-11), (InversionConfig::gaver_stehfest(28), 1e-7)] {
            let a = price_put_accumulated(&pr(), 0.0, 1.0, 1.2, &cfg).unwrap();
            assert!((a - b).abs() < tol * a, "{cfg:?}: {a} vs {b}");
        }
    }

    #[test]
    fn asymptote_values() {
        assert_eq!(small_strike_asymptote(&pr(), 0.0, 1.0), -0.125);
        assert_eq!(small_strike_asymptote(&pr(), 2.0, 2.0), 0.0);
    }

    #[test]
    fn max_rate_put() {
        assert_eq!(price_put_max_rate(&pr(), 1.0, 0.5, 1.0).unwrap(), 0.0);
        assert!(price_put_max_rate(&pr(), 1.0, 2.0, 3.0).is_err());
        // half-order integrand (y/x)^ν sinh(z_a - z_x)/sinh(z_a - z_y), z = √λ u/2
        let h = HalfOrder::with_nu(1.0).unwrap();
        let (x, y, k) = (1.0, 0.5, 4.0);
        let want = integrate(|a| h.joint(x, y, a, 2.0), x, k, &QuadConfig::default()).unwrap().value;
        let got = price_put_max_rate(&pr(), x, y, k).unwrap();
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        assert!(price_put_max_rate(&pr(), x, y, 3.0).unwrap() < got);
    }
}
