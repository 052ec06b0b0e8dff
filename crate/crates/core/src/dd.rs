//! Double-double scalar with about 31 significant digits.
//!
//! Arithmetic is delegated to [`twofloat::TwoFloat`]. The elementary functions
//! are implemented here because the upstream versions lose several digits
//! (its `ln` is only good to about 15 digits).

use core::fmt;
use core::num::FpCategory;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use twofloat::{consts, TwoFloat};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble(TwoFloat);

impl DoubleDouble {
    pub const fn from_f64(x: f64) -> Self {
        Self(TwoFloat::from_f64(x))
    }

    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    /// Builds `hi + lo`, renormalizing when the pair overlaps.
    pub fn from_pair(hi: f64, lo: f64) -> Self {
        Self(TwoFloat::new_add(hi, lo))
    }

    pub fn inner(self) -> TwoFloat {
        self.0
    }

    fn scale2(self, k: i32) -> Self {
        // exact unless the result leaves the normal range
        let mut v = self;
        let mut k = k;
        while k != 0 {
            let step = k.clamp(-1000, 1000);
            let f = 2f64.powi(step);
            v = Self::from_pair(v.hi() * f, v.lo() * f);
            k -= step;
        }
        v
    }

    /// `exp(r) - 1` for `|r| <= ln 2 / 2`, via argument halving.
    fn expm1_reduced(r: Self) -> Self {
        const HALVINGS: i32 = 10;
        let s = r.scale2(-HALVINGS);
        // |s| < 3.4e-4 so 12 terms reach 1e-45
        let mut term = s;
        let mut sum = s;
        for n in 2..=12 {
            term = term * s / Self::from_f64(n as f64);
            sum += term;
        }
        for _ in 0..HALVINGS {
            sum = sum * (sum + Self::from_f64(2.0));
        }
        sum
    }

    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        // |r| <= pi/4, Taylor to 1e-34
        let r2 = r * r;
        let mut s_term = r;
        let mut s = r;
        let mut c_term = Self::one();
        let mut c = Self::one();
        let mut n = 1.0;
        loop {
            c_term = -c_term * r2 / Self::from_f64(n * (n + 1.0));
            s_term = -s_term * r2 / Self::from_f64((n + 1.0) * (n + 2.0));
            c += c_term;
            s += s_term;
            n += 2.0;
            if c_term.abs().hi() < 1e-36 && s_term.abs().hi() < 1e-36 {
                break;
            }
        }
        (s, c)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e}, {:e})", self.hi(), self.lo())
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.hi(), f)
    }
}

impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&self.hi(), f)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $atr:ident, $af:ident) => {
        impl $tr for DoubleDouble {
            type Output = Self;
            #[inline]
            fn $f(self, rhs: Self) -> Self {
                Self($tr::$f(self.0, rhs.0))
            }
        }
        impl $atr for DoubleDouble {
            #[inline]
            fn $af(&mut self, rhs: Self) {
                self.0 = $tr::$f(self.0, rhs.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Rem, rem, RemAssign, rem_assign);

// upstream division skips the fused residual and keeps only 53 bits for
// some quotients, so long division is done here
impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let b = rhs.hi();
        let q1 = self.hi() / b;
        if !q1.is_finite() || q1 == 0.0 {
            return Self::from_f64(q1);
        }
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi() / b;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi() / b;
        Self::from_pair(q1, q2) + Self::from_f64(q3)
    }
}

impl DivAssign for DoubleDouble {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = <TwoFloat as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        TwoFloat::from_str_radix(s, radix).map(Self)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi() + self.lo())
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        TwoFloat::from_i64(n).map(Self)
    }
    fn from_u64(n: u64) -> Option<Self> {
        TwoFloat::from_u64(n).map(Self)
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::from_f64(n))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        <TwoFloat as NumCast>::from(n).map(Self)
    }
}

impl FloatConst for DoubleDouble {
    fn E() -> Self {
        Self(consts::E)
    }
    fn FRAC_1_PI() -> Self {
        Self(consts::FRAC_1_PI)
    }
    fn FRAC_1_SQRT_2() -> Self {
        Self(consts::FRAC_1_SQRT_2)
    }
    fn FRAC_2_PI() -> Self {
        Self(consts::FRAC_2_PI)
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Self(consts::FRAC_2_SQRT_PI)
    }
    fn FRAC_PI_2() -> Self {
        Self(consts::FRAC_PI_2)
    }
    fn FRAC_PI_3() -> Self {
        Self(consts::FRAC_PI_3)
    }
    fn FRAC_PI_4() -> Self {
        Self(consts::FRAC_PI_4)
    }
    fn FRAC_PI_6() -> Self {
        Self(consts::FRAC_PI_6)
    }
    fn FRAC_PI_8() -> Self {
        Self(consts::FRAC_PI_8)
    }
    fn LN_10() -> Self {
        Self(consts::LN_10)
    }
    fn LN_2() -> Self {
        Self(consts::LN_2)
    }
    fn LOG10_E() -> Self {
        Self(consts::LOG10_E)
    }
    fn LOG2_E() -> Self {
        Self(consts::LOG2_E)
    }
    fn PI() -> Self {
        Self(consts::PI)
    }
    fn SQRT_2() -> Self {
        Self(consts::SQRT_2)
    }
    fn TAU() -> Self {
        Self(consts::TAU)
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        Self(TwoFloat::NAN)
    }
    fn infinity() -> Self {
        Self(TwoFloat::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self(TwoFloat::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self::from_f64(-0.0)
    }
    fn min_value() -> Self {
        Self(TwoFloat::MIN)
    }
    fn min_positive_value() -> Self {
        Self(TwoFloat::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        Self(TwoFloat::MAX)
    }
    fn epsilon() -> Self {
        Self(TwoFloat::EPSILON)
    }
    fn is_nan(self) -> bool {
        self.hi().is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi().is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi().is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi().is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi().classify()
    }
    fn floor(self) -> Self {
        Self(Float::floor(self.0))
    }
    fn ceil(self) -> Self {
        Self(Float::ceil(self.0))
    }
    fn round(self) -> Self {
        Self(Float::round(self.0))
    }
    fn trunc(self) -> Self {
        Self(Float::trunc(self.0))
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi() < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Self::from_f64(self.hi().signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi().is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi().is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self(self.0.powi(-n)).recip();
        }
        Self(self.0.powi(n))
    }
    fn powf(self, n: Self) -> Self {
        if n.is_zero() {
            return Self::one();
        }
        if self.is_zero() {
            return if n.hi() > 0.0 { Self::zero() } else { Self::infinity() };
        }
        let ni = n.hi();
        if n.lo() == 0.0 && ni.fract() == 0.0 && ni.abs() < 64.0 {
            return self.powi(ni as i32);
        }
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.hi() == 0.0 {
            return Self::zero();
        }
        Self(Float::sqrt(self.0))
    }
    fn exp(self) -> Self {
        let h = self.hi();
        if h.is_nan() {
            return self;
        }
        if h > 709.78 {
            return Self::infinity();
        }
        if h < -745.2 {
            return Self::zero();
        }
        let k = (h / core::f64::consts::LN_2).round();
        let r = self - Self::LN_2() * Self::from_f64(k);
        let e = Self::expm1_reduced(r);
        (e + Self::one()).scale2(k as i32)
    }
    fn exp2(self) -> Self {
        (self * Self::LN_2()).exp()
    }
    fn ln(self) -> Self {
        let h = self.hi();
        if h.is_nan() || h < 0.0 {
            return Self::nan();
        }
        if h == 0.0 {
            return Self::neg_infinity();
        }
        if h.is_infinite() {
            return self;
        }
        // one Newton step on exp doubles the 53 correct bits of the seed
        let y0 = Self::from_f64(h.ln());
        let t = self * (-y0).exp();
        y0 + (t - Self::one())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / Self::LN_2()
    }
    fn log10(self) -> Self {
        self.ln() / Self::LN_10()
    }
    fn max(self, other: Self) -> Self {
        if other > self || self.is_nan() {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if other < self || self.is_nan() {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let y0 = Self::from_f64(self.hi().cbrt());
        y0 - (y0 * y0 * y0 - self) / (Self::from_f64(3.0) * y0 * y0)
    }
    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (big, small) = if a > b { (a, b) } else { (b, a) };
        if big.is_zero() {
            return big;
        }
        let q = small / big;
        big * (Self::one() + q * q).sqrt()
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos();
        s / c
    }
    fn asin(self) -> Self {
        self.atan2((Self::one() - self * self).sqrt())
    }
    fn acos(self) -> Self {
        (Self::one() - self * self).sqrt().atan2(self)
    }
    fn atan(self) -> Self {
        if !self.is_finite() {
            return Self::from_f64(self.hi().atan());
        }
        // Newton on sin(y) - x cos(y)
        let mut y = Self::from_f64(self.hi().atan());
        for _ in 0..2 {
            let (s, c) = y.sin_cos();
            y -= (s - self * c) / (c + self * s);
        }
        y
    }
    fn atan2(self, other: Self) -> Self {
        let (y, x) = (self, other);
        if x.is_zero() {
            if y.is_zero() {
                return Self::zero();
            }
            return if y.hi() > 0.0 { Self::FRAC_PI_2() } else { -Self::FRAC_PI_2() };
        }
        if y.abs() <= x.abs() {
            let a = (y / x).atan();
            if x.hi() > 0.0 {
                a
            } else if y.hi() >= 0.0 {
                a + Self::PI()
            } else {
                a - Self::PI()
            }
        } else {
            let a = -(x / y).atan();
            if y.hi() > 0.0 {
                a + Self::FRAC_PI_2()
            } else {
                a - Self::FRAC_PI_2()
            }
        }
    }
    fn sin_cos(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::nan(), Self::nan());
        }
        let k = (self.hi() / core::f64::consts::FRAC_PI_2).round();
        let r = self - Self::FRAC_PI_2() * Self::from_f64(k);
        let (s, c) = Self::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
    fn exp_m1(self) -> Self {
        if self.hi().abs() <= 0.34 {
            Self::expm1_reduced(self)
        } else {
            self.exp() - Self::one()
        }
    }
    fn ln_1p(self) -> Self {
        let h = self.hi();
        if h <= -1.0 {
            return if h == -1.0 { Self::neg_infinity() } else { Self::nan() };
        }
        if h.abs() > 0.5 {
            return (Self::one() + self).ln();
        }
        let y0 = Self::from_f64(h.ln_1p());
        let e = y0.exp_m1();
        y0 - (e - self) / (Self::one() + e)
    }
    fn sinh(self) -> Self {
        let e = self.exp_m1();
        (e + e / (e + Self::one())) * Self::from_f64(0.5)
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()) * Self::from_f64(0.5)
    }
    fn tanh(self) -> Self {
        if self.hi().abs() > 40.0 {
            return Self::from_f64(self.hi().signum());
        }
        let e = (self * Self::from_f64(2.0)).exp_m1();
        e / (e + Self::from_f64(2.0))
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = if a.hi() < 0.5 {
            let a2 = a * a;
            (a + a2 / (Self::one() + (Self::one() + a2).sqrt())).ln_1p()
        } else {
            (a + (a * a + Self::one()).sqrt()).ln()
        };
        if self.hi() < 0.0 {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        if self.hi() < 1.0 {
            return Self::nan();
        }
        (self + (self * self - Self::one()).sqrt()).ln()
    }
    fn atanh(self) -> Self {
        let two = Self::from_f64(2.0);
        (two * self / (Self::one() - self)).ln_1p() / two
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi().integer_decode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> DoubleDouble {
        DoubleDouble::from_f64(x)
    }

    fn rel(a: DoubleDouble, hi: f64, lo: f64) -> f64 {
        let b = DoubleDouble::from_pair(hi, lo);
        ((a - b) / b).abs().hi()
    }

    // references split into (hi, lo) from 40-digit evaluations
    #[test]
    fn exp_ln_reach_double_double_accuracy() {
        let e1 = dd(1.0).exp();
        assert!(rel(e1, core::f64::consts::E, 1.4456468917292502e-16) < 1e-30);
        let l = dd(3.7).ln();
        let back = l.exp();
        assert!(((back - dd(3.7)) / dd(3.7)).abs().hi() < 1e-30);
        let l2 = dd(2.0).ln();
        assert!(rel(l2, core::f64::consts::LN_2, 2.3190468138462996e-17) < 1e-30);
    }

    #[test]
    fn expm1_and_ln1p_are_relative_near_zero() {
        let x = dd(1e-20);
        let e = x.exp_m1();
        assert!(((e - x) / x).abs().hi() < 1e-19);
        let l = x.ln_1p();
        assert!(((l - x) / x).abs().hi() < 1e-19);
        let y = dd(0.3);
        assert!(((y.exp_m1().ln_1p() - y) / y).abs().hi() < 1e-30);
    }

    #[test]
    fn trig_identities() {
        for &x in &[0.1, 1.0, 2.5, -4.0, 10.0, 100.0] {
            let (s, c) = dd(x).sin_cos();
            assert!((s * s + c * c - dd(1.0)).abs().hi() < 1e-30);
            assert!((s.hi() - x.sin()).abs() < 1e-15);
            let a = dd(x).atan();
            assert!((a.tan() - dd(x)).abs().hi() < 1e-29 * x.abs().max(1.0).powi(2));
        }
    }

    #[test]
    fn hyperbolic_consistency() {
        for &x in &[1e-10, 0.2, 1.0, 5.0, -3.0] {
            let v = dd(x);
            let (s, c) = (v.sinh(), v.cosh());
            assert!(((c * c - s * s) - dd(1.0)).abs().hi() < 1e-28 * c.hi() * c.hi());
            assert!(((v.asinh().sinh() - v) / v).abs().hi() < 1e-29);
        }
    }

    #[test]
    fn pow_and_roots() {
        let x = dd(2.0);
        let r = x.powf(dd(0.5));
        assert!((r * r - x).abs().hi() < 1e-30);
        let c = dd(27.0).cbrt();
        assert!((c - dd(3.0)).abs().hi() < 1e-30);
    }
}
