//! Elementary forms of the transforms when `ν/(p+1) = ±1/2`, where `I` and `K`
//! reduce to hyperbolic functions. These are independent of the Bessel code and
//! serve as oracles for it.

use super::{BesqParams, Branch};
use crate::error::{BesqError, Result};
use crate::scalar::Real;

fn pow<S: Real>(x: S, e: S) -> S {
    if x.is_zero() {
        return if e > S::zero() { S::zero() } else if e.is_zero() { S::one() } else { S::infinity() };
    }
    (e * x.ln()).exp()
}

/// Parameters with `|ν|/(p+1) = 1/2`, i.e. `p = 2|ν| - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfOrder<S> {
    params: BesqParams<S>,
}

impl<S: Real> HalfOrder<S> {
    pub fn new(params: BesqParams<S>) -> Result<Self> {
        let gap = (params.order_k() - S::of(0.5)).abs();
        if gap > S::epsilon() * S::of(16.0) || params.nu().is_zero() {
            return Err(BesqError::InvalidConfig(format!(
                "half-order forms need |ν|/(p+1) = 1/2, got ν = {}, p = {}",
                params.nu(),
                params.p()
            )));
        }
        Ok(Self { params })
    }

    /// The half-order pair with index `ν`: `p = 2|ν| - 1`.
    pub fn with_nu(nu: S) -> Result<Self> {
        Self::new(BesqParams::new(nu, S::of(2.0) * nu.abs() - S::one())?)
    }

    pub fn params(&self) -> BesqParams<S> {
        self.params
    }

    /// `u ↦ √λ u^{|ν|} / (2|ν|)`, the Bessel argument.
    fn arg(&self, u: S, lambda: S) -> S {
        let nu = self.params.nu().abs();
        lambda.sqrt() * pow(u, nu) / (S::of(2.0) * nu)
    }

    /// `E_x[exp(-(λ/2) Σ)]` in hyperbolic form.
    pub fn laplace(&self, x: S, y: S, lambda: S) -> S {
        let nu = self.params.nu();
        let (zx, zy) = (self.arg(x, lambda), self.arg(y, lambda));
        if x == y {
            return S::one();
        }
        match (nu > S::zero(), y < x) {
            (false, true) => (zy - zx).exp(),
            (true, true) => {
                if y.is_zero() {
                    return S::zero();
                }
                pow(y / x, nu) * (zy - zx).exp()
            }
            (false, false) => zx.cosh() / zy.cosh(),
            (true, false) => {
                let ratio_sinh = if x.is_zero() { S::one() } else { zx.sinh() / zx };
                // (y/x)^ν sinh(z_x)/sinh(z_y) with z ∝ u^ν
                ratio_sinh * zy / zy.sinh()
            }
        }
    }

    /// `E_x[1{R_a > R_y} exp(-(λ/2) Σ)]` for either barrier side.
    pub fn joint(&self, x: S, y: S, a: S, lambda: S) -> S {
        let nu = self.params.nu();
        let (za, zx, zy) = (self.arg(a, lambda), self.arg(x, lambda), self.arg(y, lambda));
        let core = (za - zx).abs().sinh() / (za - zy).abs().sinh();
        if nu > S::zero() {
            pow(y / x, nu) * core
        } else {
            core
        }
    }

    /// A representative of the scale function of the `w`-transformed process,
    /// correct up to an affine change.
    pub fn scale_representative(&self, x: S, lambda: S, branch: Branch) -> S {
        let z = self.arg(x, lambda);
        let two = S::of(2.0);
        match (branch, self.params.nu() > S::zero()) {
            (Branch::K, _) => (two * z).exp(),
            (Branch::I, false) => z.tanh(),
            (Branch::I, true) => -S::one() / z.tanh(),
        }
    }

    /// Start and target of the three-dimensional squared Bessel process whose
    /// hitting time has the conditioned law of `Σ` given `R_a > R_y`.
    pub fn conditional_levels(&self, x: S, y: S, a: S) -> (S, S) {
        let nu = self.params.nu().abs();
        let den = S::of(4.0) * nu * nu;
        let zeta = |u: S| {
            let d = pow(a, nu) - pow(u, nu);
            d * d / den
        };
        (zeta(x), zeta(y))
    }

    /// Transform of the reversed jump density, `(1-x)^{ν-1} / √λ`.
    pub fn reversed_jump_transform(&self, x: S, lambda: S) -> S {
        pow(S::one() - x, self.params.nu() - S::one()) / lambda.sqrt()
    }

    /// Reversed jump density `(1-x)^{ν-1} / √(2πb)`.
    pub fn reversed_jump_density(&self, x: S, b: S) -> S {
        pow(S::one() - x, self.params.nu() - S::one()) / (S::of(2.0) * S::PI() * b).sqrt()
    }
}

/// Density of the first hitting time of `level > 0` by standard Brownian motion.
pub fn brownian_hitting_density(level: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    level / (2.0 * std::f64::consts::PI * t * t * t).sqrt() * (-level * level / (2.0 * t)).exp()
}

/// Distribution function of the same hitting time, `erfc(level / √(2t))`.
pub fn brownian_hitting_cdf(level: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    libm::erfc(level / (2.0 * t).sqrt())
}
