//! Scalar rings for coefficients: exact rationals and binary64 floats.
//!
//! All algebraic computations run over [`Rational`]; `f64` is reserved for
//! flow integration and quadrature. Mixed-mode arithmetic is impossible by
//! construction — conversion is explicit via [`Scalar::to_f64`] or
//! [`crate::form::Form::map`].

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use std::fmt;

/// Exact rational scalar (arbitrary-precision numerator and denominator).
pub type Rational = BigRational;

/// Build a rational from a numerator/denominator pair.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Build a rational from an integer.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Coefficient ring for forms, matrices and polynomials.
///
/// Implemented for [`Rational`] (exact) and `f64` (approximate). The `EXACT`
/// flag controls pivot selection in elimination and root extraction
/// semantics; see [`Scalar::nth_root`].
pub trait Scalar: Clone + PartialEq + PartialOrd + fmt::Debug + fmt::Display + 'static {
    /// True when arithmetic in this ring is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    /// `p/q`, `q != 0`.
    fn from_ratio(p: i64, q: i64) -> Self;
    /// Convert an exact rational into this ring.
    fn from_rational(r: &Rational) -> Self;

    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Division by a nonzero scalar.
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    /// Sign as −1, 0 or +1.
    fn signum(&self) -> i32;
    fn to_f64(&self) -> f64;

    /// Real `n`-th root, `n ≥ 1`.
    ///
    /// Exact mode: `Some` only when `self` is a perfect `n`-th power in ℚ
    /// (negative arguments allowed for odd `n`). Float mode: the real root
    /// whenever one exists.
    fn nth_root(&self, n: u32) -> Option<Self>;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn from_int(n: i64) -> Self {
        int(n)
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        ratio(p, q)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn is_zero(&self) -> bool {
        <Rational as Zero>::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        assert!(!<Rational as Zero>::is_zero(rhs), "division by zero");
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn signum(&self) -> i32 {
        if <Rational as Zero>::is_zero(self) {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn to_f64(&self) -> f64 {
        // Scale into f64 range by splitting off the integer part; adequate
        // for the magnitudes this library produces.
        let trunc = self.trunc();
        let frac = self - &trunc;
        let t = bigint_to_f64(trunc.numer());
        let fr = bigint_to_f64(frac.numer()) / bigint_to_f64(frac.denom());
        t + fr
    }

    fn nth_root(&self, n: u32) -> Option<Self> {
        assert!(n >= 1);
        if <Rational as Zero>::is_zero(self) {
            return Some(<Rational as Zero>::zero());
        }
        if self.is_negative() && n % 2 == 0 {
            return None;
        }
        let p = exact_int_root(self.numer(), n)?;
        let q = exact_int_root(self.denom(), n)?;
        Some(Rational::new(p, q))
    }
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    // num's conversion saturates sensibly for huge values.
    use num::ToPrimitive;
    b.to_f64().unwrap_or(f64::INFINITY * b.signum().to_f64().unwrap_or(1.0))
}

/// Exact integer `n`-th root: `Some(r)` iff `r^n == b` over ℤ.
fn exact_int_root(b: &BigInt, n: u32) -> Option<BigInt> {
    if b.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return exact_int_root(&-b, n).map(|r| -r);
    }
    let r = b.nth_root(n);
    if num::pow::pow(r.clone(), n as usize) == *b {
        Some(r)
    } else {
        None
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn signum(&self) -> i32 {
        if *self == 0.0 {
            0
        } else if *self > 0.0 {
            1
        } else {
            -1
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }

    fn nth_root(&self, n: u32) -> Option<Self> {
        assert!(n >= 1);
        if *self == 0.0 {
            return Some(0.0);
        }
        if *self < 0.0 {
            if n % 2 == 0 {
                return None;
            }
            return Some(-(-self).powf(1.0 / n as f64));
        }
        Some(self.powf(1.0 / n as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_nth_root_exact_only() {
        assert_eq!(int(4).nth_root(2), Some(int(2)));
        assert_eq!(int(-8).nth_root(3), Some(int(-2)));
        assert_eq!(int(-4).nth_root(2), None);
        assert_eq!(int(2).nth_root(2), None);
        assert_eq!(ratio(9, 4).nth_root(2), Some(ratio(3, 2)));
        assert_eq!(ratio(8, 27).nth_root(3), Some(ratio(2, 3)));
        assert_eq!(ratio(8, 26).nth_root(3), None);
        // 6^9 is a perfect ninth power.
        let p = num::pow::pow(int(6), 9);
        assert_eq!(p.nth_root(9), Some(int(6)));
    }

    #[test]
    fn float_nth_root() {
        assert!((8.0f64.nth_root(3).unwrap() - 2.0).abs() < 1e-15);
        assert!(((-8.0f64).nth_root(3).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!((-1.0f64).nth_root(2), None);
    }

    #[test]
    fn rational_to_f64() {
        assert_eq!(ratio(1, 2).to_f64(), 0.5);
        assert_eq!(int(-7).to_f64(), -7.0);
    }
}
