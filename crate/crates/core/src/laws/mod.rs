//! Laplace transforms and related laws of `Σ = ∫₀^{R_y} X_s^p ds` for a squared
//! Bessel process `X` of index `ν`, together with hitting times, barrier events
//! and jump measures.
//!
//! Transform convention throughout: `E[exp(-(λ/2) Σ)]`.

mod closed_form;
mod complex;
mod joint;
mod kernel;
mod scale;
mod transforms;

pub use closed_form::{brownian_hitting_cdf, brownian_hitting_density, HalfOrder};
pub use complex::{jump_measure_transform_complex, log_laplace_sigma_complex};
pub use joint::joint_r_sigma_laplace;
pub use kernel::{kernel_w, log_w_derivative};
pub use scale::scale_tilde;
pub use transforms::{
    conditional_max_laplace, equivalent_hitting_params, hitting_probability, is_defective, jump_measure_transform,
    joint_max_laplace, joint_max_laplace_with, laplace_hitting_time, laplace_sigma, laplace_sigma_with, log_laplace_sigma, log_laplace_sigma_with, mean_sigma,
    mean_sigma_exact, reversed_laplace, scaling_identity_check, EquivalentHitting, JumpDirection,
};

use crate::error::{BesqError, Result};
use crate::scalar::Real;

/// Index and exponent of the functional; the dimension is `δ = 2(ν + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesqParams<S> {
    nu: S,
    p: S,
}

impl<S: Real> BesqParams<S> {
    /// Requires `ν >= -1` and `p > -1`.
    pub fn new(nu: S, p: S) -> Result<Self> {
        if !nu.is_finite() || !p.is_finite() {
            return Err(BesqError::NonFinite("index or exponent"));
        }
        if nu < -S::one() {
            return Err(BesqError::RegimeViolation(format!("index ν = {nu} below -1")));
        }
        if p <= -S::one() {
            return Err(BesqError::RegimeViolation(format!("exponent p = {p} must exceed -1")));
        }
        Ok(Self { nu, p })
    }

    pub fn from_delta(delta: S, p: S) -> Result<Self> {
        Self::new(delta / S::of(2.0) - S::one(), p)
    }

    pub fn nu(&self) -> S {
        self.nu
    }

    pub fn p(&self) -> S {
        self.p
    }

    pub fn delta(&self) -> S {
        S::of(2.0) * (self.nu + S::one())
    }

    /// Order of the decreasing kernel, `|ν| / (p + 1)`.
    pub fn order_k(&self) -> S {
        self.nu.abs() / (self.p + S::one())
    }

    /// Order of the increasing kernel, `ν / (p + 1)`, possibly negative.
    pub fn order_i(&self) -> S {
        self.nu / (self.p + S::one())
    }

    /// Whether an upward passage `x → y > x` is covered by the theory: `ν >= 0`,
    /// or `-1 < ν < 0` with `p >= 0`, or `ν = -1` with `p > 0`.
    pub fn upward_allowed(&self) -> bool {
        let neg_one = -S::one();
        self.nu >= S::zero() || (self.nu > neg_one && self.p >= S::zero()) || (self.nu == neg_one && self.p > S::zero())
    }

    pub fn cast<T: Real>(&self) -> BesqParams<T> {
        BesqParams { nu: T::of(self.nu.f64()), p: T::of(self.p.f64()) }
    }
}

/// Which solution of the kernel equation is in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    /// Decreasing solution built on `K`, used for downward passages `y <= x`.
    K,
    /// Increasing solution built on `I`, used for upward passages `y >= x`.
    I,
}

/// One transform evaluation: start `x`, target `y`, transform variable `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaQuery<S> {
    pub params: BesqParams<S>,
    pub x: S,
    pub y: S,
    pub lambda: S,
}

impl<S: Real> SigmaQuery<S> {
    pub fn new(params: BesqParams<S>, x: S, y: S, lambda: S) -> Result<Self> {
        let q = Self { params, x, y, lambda };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() || !self.lambda.is_finite() {
            return Err(BesqError::NonFinite("level or transform variable"));
        }
        if self.x < S::zero() || self.y < S::zero() {
            return Err(BesqError::InvalidConfig(format!("levels must be >= 0 (x = {}, y = {})", self.x, self.y)));
        }
        if self.lambda < S::zero() {
            return Err(BesqError::InvalidConfig(format!("λ = {} must be >= 0", self.lambda)));
        }
        Ok(())
    }

    /// Branch implied by the passage direction, after checking the regime.
    pub fn branch(&self) -> Result<Branch> {
        if self.y <= self.x {
            return Ok(Branch::K);
        }
        if !self.params.upward_allowed() {
            return Err(BesqError::RegimeViolation(format!(
                "upward passage with ν = {} and p = {} is outside the supported regime \
                 (needs -1 < ν < 0 with p >= 0, or ν = -1 with p > 0, or ν >= 0)",
                self.params.nu, self.params.p
            )));
        }
        Ok(Branch::I)
    }

    pub fn with_lambda(&self, lambda: S) -> Self {
        Self { lambda, ..*self }
    }
}

/// Barrier side of a [`BarrierQuery`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Barrier {
    /// `a > x >= y`: the event is that the running maximum stays below `a`.
    Max,
    /// `a < x <= y`: the event is that the running minimum stays above `a`.
    Min,
}

/// A transform restricted to the event `R_a > R_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierQuery<S> {
    pub base: SigmaQuery<S>,
    pub a: S,
}

impl<S: Real> BarrierQuery<S> {
    pub fn new(base: SigmaQuery<S>, a: S) -> Result<Self> {
        let bq = Self { base, a };
        bq.orientation()?;
        Ok(bq)
    }

    pub fn orientation(&self) -> Result<Barrier> {
        self.base.validate()?;
        let SigmaQuery { x, y, .. } = self.base;
        if self.a.is_nan() || self.a < S::zero() {
            return Err(BesqError::Orientation(format!("barrier a = {} must be >= 0", self.a)));
        }
        if self.a > x && x >= y {
            Ok(Barrier::Max)
        } else if self.a < x && x <= y {
            self.base.branch()?;
            Ok(Barrier::Min)
        } else {
            Err(BesqError::Orientation(format!(
                "need a > x >= y or a < x <= y, got a = {}, x = {x}, y = {y}",
                self.a
            )))
        }
    }
}
