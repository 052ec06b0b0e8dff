use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::kernel::{bessel_arg, kernel_w, log_i_over_k, log_k_over_i, log_w_derivative};
use super::{Barrier, BarrierQuery, BesqParams, Branch, SigmaQuery};
use crate::bessel::{BesselSource, Exact};
use crate::error::{BesqError, Result};
use crate::scalar::Real;
use crate::special::log_sub_exp;

/// Whether `Σ = ∞` with positive probability: downward passages of a transient
/// process, or passage to 0 when 0 is polar.
pub fn is_defective<S: Real>(q: &SigmaQuery<S>) -> bool {
    let nu = q.params.nu();
    q.y < q.x && (nu > S::zero() || (nu.is_zero() && q.y.is_zero()))
}

/// `Q_x[R_y < ∞]`.
pub fn hitting_probability<S: Real>(params: &BesqParams<S>, x: S, y: S) -> S {
    let nu = params.nu();
    if y >= x || nu < S::zero() {
        return S::one();
    }
    if y.is_zero() {
        return if nu >= S::zero() { S::zero() } else { S::one() };
    }
    if nu > S::zero() {
        (nu * (y / x).ln()).exp()
    } else {
        S::one()
    }
}

/// `E_x[exp(-(λ/2) Σ)]` with the exact Bessel kernels.
pub fn laplace_sigma<S: Real>(q: &SigmaQuery<S>) -> Result<S> {
    laplace_sigma_with(&Exact, q)
}

/// [`laplace_sigma`] with a caller-supplied Bessel source.
///
/// Downward passages of a transient process return the defective transform;
/// at `λ = 0` that is the hitting probability, see [`is_defective`].
pub fn laplace_sigma_with<S: Real, B: BesselSource<S> + ?Sized>(bessel: &B, q: &SigmaQuery<S>) -> Result<S> {
    Ok(log_laplace_sigma_with(bessel, q)?.exp())
}

/// `ln E_x[exp(-(λ/2) Σ)]`, finite far beyond the underflow of the transform.
pub fn log_laplace_sigma<S: Real>(q: &SigmaQuery<S>) -> Result<S> {
    log_laplace_sigma_with(&Exact, q)
}

pub fn log_laplace_sigma_with<S: Real, B: BesselSource<S> + ?Sized>(bessel: &B, q: &SigmaQuery<S>) -> Result<S> {
    q.validate()?;
    let branch = q.branch()?;
    if q.x == q.y {
        return Ok(S::zero());
    }
    if q.lambda.is_zero() {
        return Ok(hitting_probability(&q.params, q.x, q.y).ln());
    }
    let wx = kernel_w(bessel, &q.params, q.x, q.lambda, branch)?;
    let wy = kernel_w(bessel, &q.params, q.y, q.lambda, branch)?;
    if wy.is_infinite() {
        return Ok(S::neg_infinity());
    }
    Ok((wx - wy).min(S::zero()))
}

/// `E_x[exp(-(λ/2) R_y)]` for a squared Bessel process of index `ν > -1`.
pub fn laplace_hitting_time<S: Real>(nu: S, x: S, y: S, lambda: S) -> Result<S> {
    if nu <= -S::one() {
        return Err(BesqError::RegimeViolation(format!("hitting-time transform needs ν > -1, got {nu}")));
    }
    let params = BesqParams::new(nu, S::zero())?;
    laplace_sigma(&SigmaQuery::new(params, x, y, lambda)?)
}

/// Index, dimension and levels of the hitting-time problem that a random time
/// change maps `Σ` onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentHitting<S> {
    pub nu: S,
    pub delta: S,
    pub x: S,
    pub y: S,
}

/// `ν* = ν/(1+p)`, `x* = x^{1+p}/(1+p)²`, `y* = y^{1+p}/(1+p)²`.
pub fn equivalent_hitting_params<S: Real>(q: &SigmaQuery<S>) -> Result<EquivalentHitting<S>> {
    q.validate()?;
    q.branch()?;
    let a = q.params.p() + S::one();
    let map = |v: S| if v.is_zero() { v } else { (a * v.ln()).exp() / (a * a) };
    let nu = q.params.nu() / a;
    Ok(EquivalentHitting { nu, delta: S::of(2.0) * (nu + S::one()), x: map(q.x), y: map(q.y) })
}

/// `(s(x) - s(a)) / (s(y) - s(a))` for the natural scale `s` of the process:
/// `Q_x[R_y < R_a]`.
pub(crate) fn scale_ratio<S: Real>(nu: S, x: S, y: S, a: S) -> S {
    let eps = S::of(1e-8);
    if a.is_zero() {
        // s(0) = 0 for ν < 0 and -inf otherwise
        return if nu < S::zero() { (-nu * (x / y).ln()).exp() } else { S::one() };
    }
    if a.is_infinite() {
        return if nu > S::zero() { (nu * (y / x).ln()).exp() } else { S::one() };
    }
    let u = x.ln() - a.ln();
    let v = y.ln() - a.ln();
    if nu.abs() < eps {
        if y.is_zero() {
            return S::zero();
        }
        return u / v * (S::one() - nu * (u - v) / S::of(2.0));
    }
    (-nu * u).exp_m1() / (-nu * v).exp_m1()
}

/// `E_x[1{R_a > R_y} exp(-(λ/2) Σ)]`.
pub fn joint_max_laplace<S: Real>(bq: &BarrierQuery<S>) -> Result<S> {
    joint_max_laplace_with(&Exact, bq)
}

/// [`joint_max_laplace`] with a caller-supplied Bessel source.
///
/// Uses the closed form of the scale function of the `w`-transformed process:
/// `∫ dz / (z K²) = I/K` and `∫ dz / (z I²) = -K/I`.
pub fn joint_max_laplace_with<S: Real, B: BesselSource<S> + ?Sized>(bessel: &B, bq: &BarrierQuery<S>) -> Result<S> {
    let side = bq.orientation()?;
    let q = bq.base;
    if q.x == q.y {
        return Ok(S::one());
    }
    if q.lambda.is_zero() {
        return Ok(scale_ratio(q.params.nu(), q.x, q.y, bq.a));
    }
    let base = laplace_sigma_with(bessel, &q)?;
    if base.is_zero() || bq.a.is_infinite() {
        return Ok(base);
    }
    let z = |v: S| bessel_arg(&q.params, v, q.lambda);
    let log_ratio = match side {
        Barrier::Max => {
            let alpha = q.params.order_k();
            let ga = log_i_over_k(bessel, alpha, z(bq.a))?;
            let gx = log_i_over_k(bessel, alpha, z(q.x))?;
            let gy = log_i_over_k(bessel, alpha, z(q.y))?;
            log_sub_exp(ga, gx) - log_sub_exp(ga, gy)
        }
        Barrier::Min => {
            let alpha = q.params.order_i();
            let ha = log_k_over_i(bessel, alpha, z(bq.a))?;
            if ha.is_infinite() {
                return Ok(base);
            }
            let hx = log_k_over_i(bessel, alpha, z(q.x))?;
            let hy = log_k_over_i(bessel, alpha, z(q.y))?;
            log_sub_exp(ha, hx) - log_sub_exp(ha, hy)
        }
    };
    Ok((base * log_ratio.exp()).min(base))
}

/// `E_x[exp(-(λ/2) Σ) | R_a > R_y]`.
pub fn conditional_max_laplace<S: Real>(bq: &BarrierQuery<S>) -> Result<S> {
    bq.orientation()?;
    let q = bq.base;
    let prob = scale_ratio(q.params.nu(), q.x, q.y, bq.a);
    if !(prob > S::min_positive_value() * S::of(1e10)) {
        return Err(BesqError::DegenerateConditioning(prob.f64()));
    }
    Ok((joint_max_laplace(bq)? / prob).min(S::one()))
}

/// `E_x[Σ]` for `ν > 0`, `x <= y`: `(y^{p+1} - x^{p+1}) / (2(p+1)(p+ν+1))`.
pub fn mean_sigma<S: Real>(params: &BesqParams<S>, x: S, y: S) -> Result<S> {
    if !(params.nu() > S::zero()) {
        return Err(BesqError::RegimeViolation(format!("mean formula needs ν > 0, got {}", params.nu())));
    }
    if !(x >= S::zero()) || !(y >= x) || !y.is_finite() {
        return Err(BesqError::InvalidConfig(format!("mean needs 0 <= x <= y < inf (x = {x}, y = {y})")));
    }
    let a = params.p() + S::one();
    let pow = |v: S| if v.is_zero() { v } else { (a * v.ln()).exp() };
    Ok((pow(y) - pow(x)) / (S::of(2.0) * a * (a + params.nu())))
}

/// Exact rational mean for integer `p >= 0` and rational `ν, x, y`.
pub fn mean_sigma_exact(nu: &BigRational, p: u32, x: &BigRational, y: &BigRational) -> Result<BigRational> {
    if !nu.is_positive() {
        return Err(BesqError::RegimeViolation(format!("mean formula needs ν > 0, got {nu}")));
    }
    if x.is_negative() || y < x {
        return Err(BesqError::InvalidConfig(format!("mean needs 0 <= x <= y (x = {x}, y = {y})")));
    }
    let a = BigRational::from_integer(BigInt::from(p + 1));
    let pow = |v: &BigRational| -> BigRational {
        let mut r = BigRational::one();
        for _ in 0..=p {
            r *= v;
        }
        r
    };
    let two = BigRational::from_integer(BigInt::from(2));
    let den = two * &a * (&a + nu);
    if den.is_zero() {
        return Err(BesqError::InvalidConfig("degenerate denominator".into()));
    }
    Ok((pow(y) - pow(x)) / den)
}

/// Direction of the jump-measure transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum JumpDirection {
    /// Jumps of `y ↦ Σ_{p,0,y}` at level `x`: transform `(2/λ) w'(x)/w(x)` on the increasing kernel.
    Forward,
    /// Jumps of the time-reversed process at `x ∈ [0, 1)`: transform
    /// `-(2/λ) w'(1-x)/w(1-x)` with `w(x) = x^{ν/2} K_{ν/(p+1)}`.
    Reversed,
}

/// `∫₀^∞ e^{-(λ/2) b} π(x, b) db` for the jump density `π` in the given direction.
pub fn jump_measure_transform<S: Real>(params: &BesqParams<S>, x: S, lambda: S, dir: JumpDirection) -> Result<S> {
    if !(lambda > S::zero()) || !lambda.is_finite() {
        return Err(BesqError::InvalidConfig(format!("jump transform needs 0 < λ < inf, got {lambda}")));
    }
    let two_over = S::of(2.0) / lambda;
    let nu = params.nu();
    match dir {
        JumpDirection::Forward => {
            if nu < S::zero() {
                return Err(BesqError::RegimeViolation(format!("forward jump measure needs ν >= 0, got {nu}")));
            }
            if !(x >= S::zero()) || !x.is_finite() {
                return Err(BesqError::InvalidConfig(format!("level must be finite and >= 0, got {x}")));
            }
            if x.is_zero() {
                // w'/w ~ (p+1) c² x^p / (4(α+1)) near 0
                let p = params.p();
                return Ok(if p > S::zero() {
                    S::zero()
                } else if p.is_zero() {
                    S::one() / (S::of(2.0) * (nu + S::one()))
                } else {
                    S::infinity()
                });
            }
            Ok(two_over * log_w_derivative(&Exact, params, x, lambda, Branch::I)?)
        }
        JumpDirection::Reversed => {
            if !(nu > S::zero() && nu <= S::one()) {
                return Err(BesqError::RegimeViolation(format!("reversed jump measure needs 0 < ν <= 1, got {nu}")));
            }
            if !(x >= S::zero() && x < S::one()) {
                return Err(BesqError::InvalidConfig(format!("reversed level must lie in [0, 1), got {x}")));
            }
            let rev = BesqParams::new(-nu, params.p())?;
            Ok(-two_over * log_w_derivative(&Exact, &rev, S::one() - x, lambda, Branch::K)?)
        }
    }
}

/// `E[exp(-s Z_x)]` for the time-reversed functional `Z_x = ∫_{L_{1-x}}^{L_1} X^p`,
/// which has the law of `Σ` from 1 down to `1 - x` at index `-ν`.
pub fn reversed_laplace<S: Real>(params: &BesqParams<S>, x: S, s: S) -> Result<S> {
    let rev = BesqParams::new(-params.nu(), params.p())?;
    laplace_sigma(&SigmaQuery::new(rev, S::one(), S::one() - x, S::of(2.0) * s)?)
}

/// `|E_0[e^{-(λ/2)Σ_{0,y}}] - E_0[e^{-(λ y^{p+1}/2) Σ_{0,1}}]|`; zero up to
/// rounding by Brownian scaling.
pub fn scaling_identity_check<S: Real>(params: &BesqParams<S>, y: S, lambda: S) -> Result<S> {
    let lhs = laplace_sigma(&SigmaQuery::new(*params, S::zero(), y, lambda)?)?;
    let scaled = lambda * ((params.p() + S::one()) * y.ln()).exp();
    let rhs = laplace_sigma(&SigmaQuery::new(*params, S::zero(), S::one(), scaled)?)?;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn pr(nu: f64, p: f64) -> BesqParams<f64> {
        BesqParams::new(nu, p).unwrap()
    }

    fn ls(nu: f64, p: f64, x: f64, y: f64, lam: f64) -> f64 {
        laplace_sigma(&SigmaQuery::new(pr(nu, p), x, y, lam).unwrap()).unwrap()
    }

    #[test]
    fn reference_points() {
        // (y/x) e^{-√λ (x - y)/2}
        assert!((ls(1.0, 1.0, 1.0, 0.5, 4.0) - 0.303265329856316711802159282320).abs() < 1e-14);
        // (√2/2) / sinh(√2/2)
        assert!((ls(1.0, 1.0, 0.0, 1.0, 2.0) - 0.921283984302986156736787704914).abs() < 1e-14);
        let h = laplace_hitting_time(0.5, 0.0, 1.0, 2.0).unwrap();
        let s2 = 2f64.sqrt();
        assert!((h - s2 / s2.sinh()).abs() < 1e-14);
        assert_eq!(ls(0.3, 0.2, 0.7, 2.0, 0.0), 1.0);
        assert_eq!(ls(0.3, 0.2, 2.0, 2.0, 5.0), 1.0);
    }

    #[test]
    fn defective_downward_limit() {
        let q = SigmaQuery::new(pr(1.5, 0.5), 2.0, 1.0, 0.0).unwrap();
        assert!(is_defective(&q));
        let v = laplace_sigma(&q).unwrap();
        assert!((v - 0.5f64.powf(1.5)).abs() < 1e-15);
        let small = laplace_sigma(&q.with_lambda(1e-14)).unwrap();
        assert!((small - v).abs() < 1e-6);
        assert_eq!(ls(0.0, 1.0, 1.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn equivalent_params_examples() {
        let q = SigmaQuery::new(pr(1.0, 1.0), 1.0, 4.0, 1.0).unwrap();
        let e = equivalent_hitting_params(&q).unwrap();
        assert_eq!((e.nu, e.x, e.delta), (0.5, 0.25, 3.0));
        assert!((e.y - 4.0).abs() < 1e-15);
        let id = equivalent_hitting_params(&SigmaQuery::new(pr(0.7, 0.0), 1.5, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!((id.nu, id.x, id.y), (0.7, 1.5, 0.5));
    }

    #[test]
    fn barrier_examples() {
        let q = SigmaQuery::new(pr(-0.5, 0.0), 1.0, 0.0, 1.0).unwrap();
        let v = joint_max_laplace(&BarrierQuery::new(q, 4.0).unwrap()).unwrap();
        assert!((v - 0.324027136831942699787488676613).abs() < 1e-13);
        let far = joint_max_laplace(&BarrierQuery::new(q, 1e6).unwrap()).unwrap();
        assert!((far - laplace_sigma(&q).unwrap()).abs() < 1e-6);
        assert!(far <= laplace_sigma(&q).unwrap());
    }

    #[test]
    fn conditional_at_zero_lambda_is_one() {
        let q = SigmaQuery::new(pr(1.3, 0.4), 1.0, 0.3, 0.0).unwrap();
        let v = conditional_max_laplace(&BarrierQuery::new(q, 2.0).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scale_ratio_limits() {
        let near = scale_ratio(1e-10, 2.0, 1.0, 4.0);
        let log_form = (2f64.ln() - 4f64.ln()) / (1f64.ln() - 4f64.ln());
        assert!((near - log_form).abs() < 1e-9);
        assert_eq!(scale_ratio(0.5, 2.0, 0.0, 4.0), 0.0);
        let neg: f64 = scale_ratio(-0.5, 2.0, 0.0, 4.0);
        assert!((neg - (1.0 - (0.5f64).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn means() {
        assert!((mean_sigma(&pr(1.0, 1.0), 0.0, 1.0).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((mean_sigma(&pr(1.0, 0.0), 0.0, 2.0).unwrap() - 0.5).abs() < 1e-16);
        assert_eq!(mean_sigma(&pr(1.0, 1.0), 0.5, 0.5).unwrap(), 0.0);
        assert!(mean_sigma(&pr(0.0, 1.0), 0.0, 1.0).is_err());
        let exact = mean_sigma_exact(&ratio(1, 1), 1, &ratio(0, 1), &ratio(1, 1)).unwrap();
        assert_eq!(exact, ratio(1, 12));
        let exact2 = mean_sigma_exact(&ratio(1, 1), 0, &ratio(0, 1), &ratio(2, 1)).unwrap();
        assert_eq!(exact2, ratio(1, 2));
    }

    #[test]
    fn jump_transforms() {
        let v = jump_measure_transform(&pr(1.0, 1.0), 1.0, 2.0, JumpDirection::Forward).unwrap();
        assert!((v - 0.161363069730213542595963685528).abs() < 1e-13);
        for &(nu, x, lam) in &[(0.5, 0.2, 1.0), (1.0, 0.5, 3.0), (0.75, 0.0, 0.4)] {
            let p = 2.0 * nu - 1.0;
            let got = jump_measure_transform(&pr(nu, p), x, lam, JumpDirection::Reversed).unwrap();
            let want = (1.0 - x).powf(nu - 1.0) / lam.sqrt();
            assert!((got - want).abs() < 1e-13 * want, "{nu} {x} {lam}");
        }
        let big = jump_measure_transform(&pr(1.0, 1.0), 1.0, 1e10, JumpDirection::Forward).unwrap();
        assert!(big < 1e-4);
    }

    #[test]
    fn z4_transform() {
        for &(x, s) in &[(0.3, 1.0), (0.9, 5.0), (0.5, 0.01)] {
            let v = reversed_laplace(&pr(1.0, 1.0), x, s).unwrap();
            assert!((v - (-(s / 2.0f64).sqrt() * x).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn scaling_examples() {
        assert!(scaling_identity_check(&pr(1.0, 1.0), 3.0, 1.0).unwrap() <= 1e-10);
        assert!(scaling_identity_check(&pr(-0.5, 0.0), 2.0, 5.0).unwrap() <= 1e-10);
        assert!(scaling_identity_check(&pr(1.0, 1.0), 1.0, 1.0).unwrap() == 0.0);
    }
}
