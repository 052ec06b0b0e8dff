//! Modified Bessel functions of real order, carried in log scale.
//!
//! `I` uses the ascending series for moderate arguments and the Hankel
//! expansion once it converges before its terms turn around. `K` is the
//! trapezoid rule applied to `∫₀^∞ exp(-z cosh t) cosh(αt) dt`, which is even in
//! `α` by construction and converges geometrically for every `z > 0`.

use crate::error::{BesqError, Result};
use crate::scalar::Real;
use crate::special::ln_gamma;

/// A real number stored as `sign · exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval<S> {
    pub log_magnitude: S,
    pub sign: i8,
}

impl<S: Real> BesselEval<S> {
    pub fn positive(log_magnitude: S) -> Self {
        Self { log_magnitude, sign: 1 }
    }

    pub fn zero() -> Self {
        Self::positive(S::neg_infinity())
    }

    /// Linear value; errors instead of returning infinity.
    pub fn value(&self) -> Result<S> {
        let v = self.log_magnitude.exp();
        if v.is_infinite() {
            return Err(BesqError::Overflow(self.log_magnitude.f64()));
        }
        Ok(if self.sign < 0 { -v } else { v })
    }
}

/// Supplies `ln I_α(z)` and `ln K_α(z)` to the law evaluators.
///
/// The default implementation is [`Exact`]; [`Perturbed`] exists so that the
/// validation suite can demonstrate its own sensitivity.
pub trait BesselSource<S: Real>: Sync {
    fn log_i(&self, alpha: S, z: S) -> Result<S>;
    fn log_k(&self, alpha: S, z: S) -> Result<S>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exact;

impl<S: Real> BesselSource<S> for Exact {
    fn log_i(&self, alpha: S, z: S) -> Result<S> {
        bessel_i(alpha, z).map(|b| b.log_magnitude)
    }
    fn log_k(&self, alpha: S, z: S) -> Result<S> {
        bessel_k(alpha, z).map(|b| b.log_magnitude)
    }
}

/// Multiplies both kernels by `1 + rel · z / (1 + z)`.
///
/// The factor depends on `z` so it does not cancel in ratios.
#[derive(Debug, Clone, Copy)]
pub struct Perturbed {
    pub rel: f64,
}

impl<S: Real> BesselSource<S> for Perturbed {
    fn log_i(&self, alpha: S, z: S) -> Result<S> {
        Ok(bessel_i(alpha, z)?.log_magnitude + self.factor(z))
    }
    fn log_k(&self, alpha: S, z: S) -> Result<S> {
        Ok(bessel_k(alpha, z)?.log_magnitude + self.factor(z))
    }
}

impl Perturbed {
    fn factor<S: Real>(&self, z: S) -> S {
        (S::of(self.rel) * z / (S::one() + z)).ln_1p()
    }
}

fn check<S: Real>(alpha: S, z: S) -> Result<()> {
    if !alpha.is_finite() {
        return Err(BesqError::NonFinite("Bessel order"));
    }
    if !z.is_finite() {
        return Err(BesqError::NonFinite("Bessel argument"));
    }
    if z < S::zero() {
        return Err(BesqError::InvalidConfig(format!("Bessel argument {} < 0", z)));
    }
    Ok(())
}

/// Smallest argument for which the neglected `e^{-2z}` Hankel term is below
/// the working precision.
fn hankel_floor<S: Real>() -> S {
    S::of(1.2 * (S::DIGITS as f64 + 2.0) + 1.0)
}

/// `I_α(z)` for `α >= -1`, `z >= 0`.
pub fn bessel_i<S: Real>(alpha: S, z: S) -> Result<BesselEval<S>> {
    check(alpha, z)?;
    if alpha < -S::one() {
        return Err(BesqError::UnsupportedOrder(alpha.f64()));
    }
    // I_{-1} = I_1
    let alpha = if alpha == -S::one() { S::one() } else { alpha };
    if z.is_zero() {
        return if alpha.is_zero() {
            Ok(BesselEval::positive(S::zero()))
        } else if alpha > S::zero() {
            Ok(BesselEval::zero())
        } else {
            Err(BesqError::Overflow(f64::INFINITY))
        };
    }
    if z >= hankel_floor::<S>() {
        if let Some(v) = log_i_hankel(alpha, z) {
            return Ok(BesselEval::positive(v));
        }
    }
    Ok(BesselEval::positive(log_i_series(alpha, z)))
}

/// Ascending series, written with Pochhammer ratios so that no Γ enters the
/// sum. Every term is positive for `α > -1`.
fn log_i_series<S: Real>(alpha: S, z: S) -> S {
    let q = z * z / S::of(4.0);
    let rescale = S::of(1e30);
    let mut log_scale = S::zero();
    // the m = 0 term is kept apart so tiny arguments keep full relative accuracy
    let mut head = S::one();
    let mut tail = S::zero();
    let mut term = S::one();
    let mut m = S::zero();
    loop {
        m += S::one();
        term *= q / (m * (m + alpha));
        tail += term;
        if tail > rescale {
            term /= rescale;
            tail /= rescale;
            head /= rescale;
            log_scale += rescale.ln();
        }
        if term <= (head + tail) * S::epsilon() * S::of(0.25) && m > q.sqrt() - alpha {
            break;
        }
    }
    let log_sum = if log_scale.is_zero() { tail.ln_1p() } else { (head + tail).ln() + log_scale };
    alpha * (z / S::of(2.0)).ln() - ln_gamma(alpha + S::one()) + log_sum
}

/// Hankel expansion; `None` when the terms do not shrink below working
/// precision before growing again, or grow large enough to cost digits.
fn log_i_hankel<S: Real>(alpha: S, z: S) -> Option<S> {
    let mu = S::of(4.0) * alpha * alpha;
    let eight_z = S::of(8.0) * z;
    let mut term = S::one();
    let mut sum = S::one();
    let mut prev = S::one();
    let mut k = S::zero();
    for _ in 0..200 {
        k += S::one();
        let odd = S::of(2.0) * k - S::one();
        term = -term * (mu - odd * odd) / (k * eight_z);
        if term.abs() > S::of(8.0) {
            return None;
        }
        if term.abs() > prev.abs() && k > S::one() {
            return None;
        }
        sum += term;
        if term.abs() <= sum.abs() * S::epsilon() * S::of(0.5) {
            return Some(z - S::of(0.5) * (S::TAU() * z).ln() + sum.ln());
        }
        prev = term;
    }
    None
}

/// `K_α(z)` for real `α`, `z > 0`.
pub fn bessel_k<S: Real>(alpha: S, z: S) -> Result<BesselEval<S>> {
    check(alpha, z)?;
    if z.is_zero() {
        return Err(BesqError::Overflow(f64::INFINITY));
    }
    Ok(BesselEval::positive(log_k_trapezoid(alpha.abs(), z)))
}

/// `ln ∫₀^∞ exp(-z(cosh t - 1)) cosh(αt) dt - z`, trapezoid in log scale.
fn log_k_trapezoid<S: Real>(alpha: S, z: S) -> S {
    let digits = S::of(S::DIGITS as f64 + 3.0) * S::LN_10();
    let half_pi_sq = S::PI() * S::PI() / S::of(2.0);
    // strip width pi/4, with the cosh(αt) growth inside the strip charged to alpha
    let h_strip = half_pi_sq / (digits + S::of(0.35) * alpha);
    // Gaussian core of width 1/sqrt(z) near t = 0
    let h_core = S::PI() * (S::of(2.0) / (digits * z)).sqrt();
    let h = h_strip.min(h_core);

    let log_f = |t: S| -> S {
        let sh = (t / S::of(2.0)).sinh();
        let at = alpha * t;
        let log_cosh = at + (S::of(-2.0) * at).exp().ln_1p() - S::LN_2();
        -S::of(2.0) * z * sh * sh + log_cosh
    };

    // locate the peak of the log-concave integrand: z sinh t = α tanh(αt) ≈ α
    let t_peak = if alpha > z { (alpha / z).asinh() } else { S::zero() };
    let f_peak = log_f(t_peak);
    let cutoff = f_peak - digits - S::of(5.0);

    let mut acc = S::zero();
    let mut add = |lf: S, w: S| {
        acc += w * (lf - f_peak).exp();
    };
    add(log_f(S::zero()), S::of(0.5));
    let mut k = S::one();
    loop {
        let t = k * h;
        let lf = log_f(t);
        add(lf, S::one());
        if t > t_peak && lf < cutoff {
            break;
        }
        k += S::one();
    }
    (acc * h).ln() + f_peak - z
}

/// `I_α'(z) / I_α(z)`.
pub fn log_derivative_i<S: Real>(alpha: S, z: S) -> Result<S> {
    check(alpha, z)?;
    if z.is_zero() {
        return Err(BesqError::InvalidConfig("log-derivative at z = 0".into()));
    }
    let a = bessel_i(alpha, z)?;
    let b = bessel_i(alpha + S::one(), z)?;
    Ok((b.log_magnitude - a.log_magnitude).exp() + alpha / z)
}

/// `K_α'(z) / K_α(z)`.
pub fn log_derivative_k<S: Real>(alpha: S, z: S) -> Result<S> {
    check(alpha, z)?;
    if z.is_zero() {
        return Err(BesqError::InvalidConfig("log-derivative at z = 0".into()));
    }
    let a = bessel_k(alpha, z)?;
    let b = bessel_k(alpha - S::one(), z)?;
    Ok(-alpha / z - (b.log_magnitude - a.log_magnitude).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use num_traits::{Float, FloatConst};

    fn li(a: f64, z: f64) -> f64 {
        bessel_i(a, z).unwrap().log_magnitude
    }
    fn lk(a: f64, z: f64) -> f64 {
        bessel_k(a, z).unwrap().log_magnitude
    }

    fn close(got: f64, want: f64, tol: f64) {
        let err = if want.abs() > 1.0 { (got - want).abs() / want.abs() } else { (got - want).abs() };
        assert!(err <= tol, "got {got:e}, want {want:e}, err {err:e}");
    }

    // 30-digit references; values near zero compared absolutely since they
    // are logs of numbers near 1
    #[test]
    fn log_i_reference_values() {
        let table = [
            (0.0, 1e-8, 2.50000000000000114908963121792e-17),
            (0.0, 1e-3, 2.49999984375001746519226874458e-7),
            (0.3, 0.7, -0.114401010559111930345590958479),
            (-0.7, 2.5, 1.06423676214984920026377088878),
            (-1.0, 3.0, 1.37456843472369957419323280397),
            (1.0, 10.0, 7.89020383410421229351549845769),
            (2.5, 50.0, 47.064450341952324594565367774),
            (20.0, 1e4, 9994.45590278799260940398996933),
            (7.3, 1e3, 995.600650671593494054904905033),
            (0.5, 1e4, 9994.47589128080723589018368735),
            (20.0, 1e-8, -424.612174950999700241241458356),
            (-0.25, 123.4, 120.074108739885983353145553482),
            (13.0, 40.0, 35.119565974827767160769542355),
        ];
        for (a, z, want) in table {
            let got = li(a, z);
            if want.abs() < 1e-3 {
                assert!(((got - want) / want).abs() < 1e-12, "I({a},{z})");
            } else {
                close(got, want, 1e-13);
            }
        }
    }

    #[test]
    fn log_k_reference_values() {
        let table = [
            (0.0, 1e-8, 2.91974781742244005184518334743),
            (0.0, 1e-3, 1.94928855019219870664522604261),
            (0.3, 0.7, -0.371697955315994538625546166505),
            (2.5, 50.0, -51.6708198067878980612611900277),
            (20.0, 1e4, -10004.359392339274772439475241),
            (7.3, 1e3, -1003.2015796504720651057434561),
            (20.0, 1e-8, 420.923295496885763938263689376),
            (1.0, 1.0, -0.507651948210752330947914851206),
            (3.0, 0.01, 15.8949395997222215900246014578),
            (0.25, 1e6, -1000006.68196402008736274473922),
            (13.0, 40.0, -39.5517646480031720083633826486),
        ];
        for (a, z, want) in table {
            close(lk(a, z), want, 1e-13);
        }
    }

    #[test]
    fn linear_values() {
        let i0 = bessel_i(0.0, 1.0).unwrap().value().unwrap();
        assert!((i0 - 1.26606587775200833559824462521).abs() < 1e-15);
        let k0 = bessel_k(0.0, 1.0).unwrap().value().unwrap();
        assert!((k0 - 0.421024438240708333335627379213).abs() < 1e-15);
        let kh = bessel_k(0.5, 1.0).unwrap().value().unwrap();
        assert!((kh - 0.461068504447894558439575873876).abs() < 1e-15);
        assert_eq!(bessel_i(0.0, 0.0).unwrap().value().unwrap(), 1.0);
        assert_eq!(bessel_i(2.0, 0.0).unwrap().value().unwrap(), 0.0);
        assert!(bessel_i(5.0, 800.0).unwrap().value().is_err());
    }

    #[test]
    fn half_order_closed_forms() {
        for &z in &[1e-4, 0.3, 1.0, 7.0, 30.0, 300.0] {
            // I_{1/2}(z) = sqrt(2/(πz)) sinh z, K_{1/2}(z) = sqrt(π/(2z)) e^{-z}
            let want_i = 0.5 * (2.0 / (std::f64::consts::PI * z)).ln() + sinh_ln(z);
            close(li(0.5, z), want_i, 2e-14);
            let want_k = 0.5 * (std::f64::consts::PI / (2.0 * z)).ln() - z;
            close(lk(0.5, z), want_k, 2e-14);
            close(lk(-0.5, z), want_k, 2e-14);
        }
    }

    fn sinh_ln(z: f64) -> f64 {
        z + (-(-2.0 * z).exp_m1()).ln() - std::f64::consts::LN_2
    }

    #[test]
    fn errors() {
        assert_eq!(bessel_i(-1.5, 1.0), Err(BesqError::UnsupportedOrder(-1.5)));
        assert!(matches!(bessel_i(f64::NAN, 1.0), Err(BesqError::NonFinite(_))));
        assert!(matches!(bessel_k(0.0, f64::INFINITY), Err(BesqError::NonFinite(_))));
        assert!(bessel_i(-0.5, 0.0).is_err());
    }

    #[test]
    fn log_derivatives() {
        for &z in &[0.5, 1.0, 5.0] {
            let d = log_derivative_k(0.5, z).unwrap();
            assert!((d - (-1.0 - 0.5 / z)).abs() < 1e-13);
        }
        let d = log_derivative_i(0.5, 1.0).unwrap();
        assert!((d - (1.0 / 1f64.tanh() - 0.5)).abs() < 1e-13);
        for &a in &[0.0, 0.5, 2.0] {
            assert!((log_derivative_i(a, 1e4).unwrap() - 1.0).abs() < 1e-3);
            assert!((log_derivative_k(a, 1e4).unwrap() + 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn double_double_reaches_thirty_digits() {
        let z = DoubleDouble::from_f64(1.0);
        let k = bessel_k(DoubleDouble::from_f64(0.5), z).unwrap().log_magnitude;
        let want = (DoubleDouble::PI() / DoubleDouble::from_f64(2.0)).ln() * DoubleDouble::from_f64(0.5) - z;
        assert!((k - want).abs().hi() < 1e-29);
        let i = bessel_i(DoubleDouble::from_f64(0.0), z).unwrap().log_magnitude;
        let want_i = DoubleDouble::from_pair(1.26606587775200833559824462521, 0.0).ln();
        assert!((i - want_i).abs().hi() < 1e-15);
    }

    #[test]
    fn single_precision_is_usable() {
        let v = bessel_k(0.5f32, 1.0f32).unwrap().value().unwrap();
        assert!((v - 0.461_068_5).abs() < 1e-6);
        let w = bessel_i(1.0f32, 10.0f32).unwrap().log_magnitude;
        assert!((w - 7.890_204).abs() < 1e-5);
    }
}
