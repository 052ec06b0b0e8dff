//! `ln I_α(z)` and `ln K_α(z)` for real order and complex argument in the
//! right half plane. Only the complex inversion contour needs these, so they
//! are f64 only. Logarithms are returned on an arbitrary branch; callers only
//! exponentiate differences.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

use crate::error::{BesqError, Result};
use crate::special::ln_gamma;

/// Above this modulus both functions use their large-argument expansions.
const HANKEL_MODULUS: f64 = 18.0;

fn check(z: C) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(BesqError::NonFinite("complex Bessel argument"));
    }
    if z.norm() == 0.0 || (z.re <= 0.0 && z.im == 0.0) {
        return Err(BesqError::InvalidConfig(format!("complex Bessel argument {z} on the cut")));
    }
    Ok(())
}

/// `Σ_k (±1)^k a_k(α) / z^k`, summed until the terms stop shrinking.
fn hankel_sums(alpha: f64, z: C) -> (C, C) {
    let mu = 4.0 * alpha * alpha;
    let mut term = C::new(1.0, 0.0);
    let (mut plus, mut alt) = (term, term);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term = term * (mu - odd * odd) / (8.0 * k as f64) / z;
        let size = term.norm();
        if size > last || size == 0.0 {
            break;
        }
        plus += term;
        alt += if k % 2 == 1 { -term } else { term };
        if size < 1e-17 * plus.norm() {
            break;
        }
        last = size;
    }
    (plus, alt)
}

pub(crate) fn log_k(alpha: f64, z: C) -> Result<C> {
    check(z)?;
    let alpha = alpha.abs();
    let half_log = (C::new(PI / 2.0, 0.0) / z).ln() * 0.5;
    if z.norm() >= HANKEL_MODULUS {
        let (plus, _) = hankel_sums(alpha, z);
        return Ok(half_log - z + plus.ln());
    }
    // K_α(z) = √(π/2z) e^{-z} / Γ(α+½) ∫₀^∞ e^{-u} u^{α-½} (1 + u/2z)^{α-½} du, u = e^s;
    // the integrand is analytic in a strip of half-width π - |arg z| around the real s axis
    let h = 0.1;
    let s_lo = -40.0 / (alpha + 0.5);
    let s_hi = (60.0 + 10.0 * alpha).ln();
    let inv_two_z = 0.5 / z;
    let n = ((s_hi - s_lo) / h).ceil() as usize;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..=n {
        let s = s_lo + j as f64 * h;
        let u = s.exp();
        let log_f = C::new(-u + (alpha + 0.5) * s, 0.0) + (C::new(1.0, 0.0) + inv_two_z * u).ln() * (alpha - 0.5);
        acc += log_f.exp();
    }
    acc *= h;
    Ok(half_log - z - ln_gamma(alpha + 0.5) + acc.ln())
}

pub(crate) fn log_i(alpha: f64, z: C) -> Result<C> {
    check(z)?;
    if alpha < -1.0 {
        return Err(BesqError::UnsupportedOrder(alpha));
    }
    let alpha = if alpha == -1.0 { 1.0 } else { alpha };
    if z.norm() >= HANKEL_MODULUS {
        let (plus, alt) = hankel_sums(alpha, z);
        let phase = if z.im >= 0.0 { (alpha + 0.5) * PI } else { -(alpha + 0.5) * PI };
        let second = C::from_polar(1.0, phase) * (-2.0 * z).exp() * plus;
        return Ok(z - (2.0 * PI * z).ln() * 0.5 + (alt + second).ln());
    }
    let q = z * z / 4.0;
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..400 {
        let kf = k as f64;
        term = term * q / (kf * (kf + alpha));
        sum += term;
        if kf > z.norm() && term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    Ok((z / 2.0).ln() * alpha - ln_gamma(alpha + 1.0) + sum.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: C, re: f64, im: f64, tol: f64) {
        let d = (got - C::new(re, im)).exp() - 1.0;
        assert!(d.norm() < tol, "{got} vs {re}+{im}i: {}", d.norm());
    }

    #[test]
    fn k_reference_values() {
        let cases = [
            (0.0, 0.3, 0.2, 0.25761050624048361994, -0.42262022790313207974),
            (0.5, 2.0, 3.0, -2.4154459867206567517, 2.7917884455559219429),
            (1.5, 0.5, -7.0, -1.2285328640595872038, 1.6063449922626728899),
            (0.25, 12.0, 15.0, -13.254978822094696244, -2.8779668650926780335),
            (0.75, 20.0, -30.0, -21.564313079506596799, -0.92097903407182832949),
            (1.0, 1e-3, 1e-3, 6.5611809033314298525, -0.78540534051648577821),
            (2.0, 5.0, 0.1, -5.2385747140683555313, -0.11618152304869014499),
            (3.0, 0.2, 16.0, -1.3484800139663594627, 1.7969977806678237654),
            (1.0 / 3.0, 40.0, 80.0, -42.021357630313553948, 1.1285255985823751079),
        ];
        for (a, x, y, re, im) in cases {
            close(log_k(a, C::new(x, y)).unwrap(), re, im, 1e-13);
        }
    }

    #[test]
    fn i_reference_values() {
        let cases = [
            (0.0, 0.3, 0.2, 0.012682406089368192755, 0.029811125950915893798, 1e-14),
            (0.5, 2.0, 3.0, 0.42209509008281659653, 2.5033939009648179931, 1e-14),
            (-0.5, 2.0, 3.0, 0.45727005944459015553, 2.5136323246595268375, 1e-14),
            (-0.25, 1.0, -9.0, -1.0223442383619170255, -2.111664522239869793, 1e-12),
            (1.5, 0.5, -7.0, -1.377315419354695051, 0.26446820837666982574, 1e-12),
            (0.75, 20.0, -30.0, 17.286152442104499508, 1.9036618989522906903, 1e-13),
            (-0.75, 3.0, 40.0, 0.23654139805850551419, 1.5587319690358106785, 1e-13),
            (2.0, 5.0, 0.1, 2.862613892637036982, 0.099013569210038358553, 1e-14),
            (1.0 / 3.0, 17.0, 16.0, 14.508033050576595393, 3.0539726980732620915, 1e-12),
        ];
        for (a, x, y, re, im, tol) in cases {
            close(log_i(a, C::new(x, y)).unwrap(), re, im, tol);
        }
    }

    #[test]
    fn real_axis_agrees_with_real_code() {
        for &(a, z) in &[(0.3, 0.7), (1.0, 5.0), (2.5, 25.0), (0.0, 17.9)] {
            let k: f64 = crate::bessel::bessel_k(a, z).unwrap().log_magnitude;
            let i: f64 = crate::bessel::bessel_i(a, z).unwrap().log_magnitude;
            assert!((log_k(a, C::new(z, 0.0)).unwrap().re - k).abs() < 1e-13 * k.abs().max(1.0));
            assert!((log_i(a, C::new(z, 0.0)).unwrap().re - i).abs() < 1e-13 * i.abs().max(1.0));
        }
    }

    #[test]
    fn cut_is_rejected() {
        assert!(log_k(0.5, C::new(-1.0, 0.0)).is_err());
        assert!(log_i(0.5, C::new(0.0, 0.0)).is_err());
    }
}
