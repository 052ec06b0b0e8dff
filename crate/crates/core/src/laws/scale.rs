//! Scale function of the process after the change of measure by `w`:
//! `s̃(x) = ∫₁^x dv / (v u²(√v))` with `u(√v) = B(c v^{(p+1)/2})`.

use super::kernel::bessel_arg;
use super::{Branch, SigmaQuery};
use crate::bessel::{BesselSource, Exact};
use crate::error::{BesqError, Result};
use crate::quad::{integrate, QuadConfig};

/// `s̃(q.x)` by adaptive quadrature in `ln v`; `-inf` when the integral
/// diverges at 0.
pub fn scale_tilde(q: &SigmaQuery<f64>, branch: Branch) -> Result<f64> {
    q.validate()?;
    if !(q.lambda > 0.0) {
        return Err(BesqError::InvalidConfig(format!("scale function needs λ > 0, got {}", q.lambda)));
    }
    let params = q.params;
    let alpha = match branch {
        Branch::K => params.order_k(),
        Branch::I => {
            if !params.upward_allowed() {
                return Err(BesqError::RegimeViolation(format!(
                    "increasing kernel undefined for ν = {}, p = {}",
                    params.nu(),
                    params.p()
                )));
            }
            params.order_i()
        }
    };
    if q.x == 1.0 {
        return Ok(0.0);
    }
    if q.x == 0.0 && branch == Branch::I && alpha >= 0.0 {
        // 1/I² ~ z^{-2α} is not integrable in ln z
        return Ok(f64::NEG_INFINITY);
    }
    let log_b = |z: f64| match branch {
        Branch::K => Exact.log_k(alpha, z),
        Branch::I => Exact.log_i(alpha, z),
    };
    let integrand = |t: f64| -> f64 {
        let z = bessel_arg(&params, t.exp(), q.lambda);
        if z == 0.0 {
            return 0.0;
        }
        match log_b(z) {
            Ok(l) => (-2.0 * l).exp(),
            Err(_) => f64::NAN,
        }
    };
    let upper = if q.x == 0.0 { f64::NEG_INFINITY } else { q.x.ln() };
    let r = integrate(integrand, 0.0, upper, &QuadConfig::tol(1e-10, 1e-11))?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::super::{BesqParams, HalfOrder};
    use super::*;

    /// `(f(a) - f(b)) / (f(a) - f(c))` is invariant under affine changes of `f`.
    fn affine_ratio(f: impl Fn(f64) -> f64, a: f64, b: f64, c: f64) -> f64 {
        (f(a) - f(b)) / (f(a) - f(c))
    }

    #[test]
    fn zero_at_one_and_increasing() {
        let pr = BesqParams::new(0.7, 0.4).unwrap();
        let at = |x: f64, br| scale_tilde(&SigmaQuery::new(pr, x, 0.0, 2.0).unwrap(), br).unwrap();
        assert_eq!(at(1.0, Branch::K), 0.0);
        for br in [Branch::K, Branch::I] {
            let vals: Vec<f64> = [0.2, 0.5, 1.0, 1.5, 3.0].iter().map(|&x| at(x, br)).collect();
            assert!(vals.windows(2).all(|w| w[0] < w[1]), "{vals:?}");
        }
        assert_eq!(at(0.0, Branch::I), f64::NEG_INFINITY);
        assert!(at(0.0, Branch::K).is_finite());
    }

    #[test]
    fn half_order_representatives() {
        for &(nu, br) in &[(-0.5, Branch::K), (1.0, Branch::K), (-0.75, Branch::I), (1.5, Branch::I)] {
            let h = HalfOrder::with_nu(nu).unwrap();
            let pr = h.params();
            let lam = 1.7;
            let s = |x: f64| scale_tilde(&SigmaQuery::new(pr, x, 0.0, lam).unwrap(), br).unwrap();
            let rep = |x: f64| h.scale_representative(x, lam, br);
            let (a, b, c) = (0.3, 1.4, 2.2);
            let got = affine_ratio(s, a, b, c);
            let want = affine_ratio(rep, a, b, c);
            assert!((got - want).abs() < 1e-8, "ν = {nu}: {got} vs {want}");
        }
    }

    #[test]
    fn regime_is_checked() {
        let pr = BesqParams::new(-0.5, -0.5).unwrap();
        let q = SigmaQuery::new(pr, 2.0, 0.0, 1.0).unwrap();
        assert!(matches!(scale_tilde(&q, Branch::I), Err(BesqError::RegimeViolation(_))));
    }
}
