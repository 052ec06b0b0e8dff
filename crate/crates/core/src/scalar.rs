//! The scalar abstraction shared by every numeric routine.

use core::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

use crate::dd::DoubleDouble;

/// Floating scalar usable by the special-function, law and inversion code.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Decimal digits carried reliably.
    const DIGITS: u32;

    /// Lossy for `f32`, exact for wider types.
    fn of(x: f64) -> Self;

    /// Rounds an exact rational to the nearest representable value.
    fn from_ratio(r: &BigRational) -> Self;

    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    /// Unit roundoff.
    fn tol() -> Self {
        Self::epsilon()
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Real for f32 {
    const DIGITS: u32 = 6;
    fn of(x: f64) -> Self {
        x as f32
    }
    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r) as f32
    }
}

impl Real for f64 {
    const DIGITS: u32 = 15;
    fn of(x: f64) -> Self {
        x
    }
    fn from_ratio(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
}

impl Real for DoubleDouble {
    const DIGITS: u32 = 31;
    fn of(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn from_ratio(r: &BigRational) -> Self {
        let hi = ratio_to_f64(r);
        if !hi.is_finite() || hi == 0.0 {
            return DoubleDouble::from_f64(hi);
        }
        let Some(hi_exact) = BigRational::from_float(hi) else {
            return DoubleDouble::from_f64(hi);
        };
        let lo = ratio_to_f64(&(r - hi_exact));
        DoubleDouble::from_pair(hi, lo)
    }
}

/// Exact rational `n / d`.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_rounding_keeps_the_low_word() {
        let third = DoubleDouble::from_ratio(&ratio(1, 3));
        let back = third * DoubleDouble::of(3.0) - DoubleDouble::of(1.0);
        assert!(back.abs().hi() < 1e-31);
        assert_eq!(f64::from_ratio(&ratio(1, 4)), 0.25);
        assert_eq!(f32::from_ratio(&ratio(-3, 2)), -1.5);
    }
}
