//! Scalar abstractions shared by the symbolic and numeric layers.
//!
//! Everything that must be *exact* in the structural identities (groupoid
//! structure maps, multiplicativity residuals, coboundaries of potentials) is
//! written against [`Scalar`], which is implemented for `f64` and for
//! arbitrary-precision rationals. The complexification of either is a
//! [`Field`], which is all the generic linear algebra needs.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Arbitrary-precision rational used for exact arithmetic.
pub type Rational = BigRational;

/// A coefficient field for the dense linear algebra in [`crate::linalg`].
pub trait Field: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// `true` when arithmetic is exact, so zero tests ignore tolerances.
    const EXACT: bool;

    /// Absolute value as a double, used for pivoting and residual reports.
    fn magnitude(&self) -> f64;

    /// Complex conjugate (identity on real fields).
    fn conj(&self) -> Self;

    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

/// An ordered real scalar: `f64` or [`Rational`].
pub trait Scalar: Field + PartialOrd + Signed + ToPrimitive + FromPrimitive + Display {
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// Lossy conversion to `f64`.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn floor(&self) -> Self;

    /// `self mod m` in `[0, m)`.
    fn rem_euclid_int(&self, m: i64) -> Self {
        let m = Self::from_int(m);
        let q = (self.clone() / m.clone()).floor();
        self.clone() - q * m
    }

    /// Nearest integer when `self` is within `tol` of one (exactly, for rationals).
    fn as_integer(&self, tol: f64) -> Option<i64>;
}

impl Field for f64 {
    const EXACT: bool = false;

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn conj(&self) -> Self {
        *self
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn as_integer(&self, tol: f64) -> Option<i64> {
        let r = self.round();
        ((self - r).abs() <= tol).then_some(r as i64)
    }
}

impl Field for Rational {
    const EXACT: bool = true;

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn as_integer(&self, _tol: f64) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }
}

impl<S: Scalar> Field for Complex<S> {
    const EXACT: bool = S::EXACT;

    fn magnitude(&self) -> f64 {
        self.re.approx().hypot(self.im.approx())
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

/// Lift a real scalar into its complexification.
pub fn complexify<S: Scalar>(x: S) -> Complex<S> {
    Complex::new(x, S::zero())
}

/// The imaginary unit in `Complex<S>`.
pub fn imaginary_unit<S: Scalar>() -> Complex<S> {
    Complex::new(S::zero(), S::one())
}

/// Parse `"p/q"`, `"n"` or a decimal literal into a scalar. Decimals are only
/// accepted for inexact scalars.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(S::from_ratio(p, q));
    }
    if let Ok(n) = text.parse::<i64>() {
        return Some(S::from_int(n));
    }
    if S::EXACT {
        return None;
    }
    text.parse::<f64>().ok().and_then(S::from_f64)
}

/// Convert a scalar to the exact rational it represents, if it has one.
pub fn to_rational<S: Scalar>(x: &S) -> Option<Rational> {
    if S::EXACT {
        parse_scalar::<Rational>(&x.to_string())
    } else {
        Rational::from_float(x.approx())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing_is_exact() {
        let third: Rational = parse_scalar("1/3").unwrap();
        assert_eq!(third.clone() * Rational::from_int(3), Rational::from_int(1));
        assert!(parse_scalar::<Rational>("0.377").is_none());
        assert_eq!(parse_scalar::<f64>("0.377"), Some(0.377));
    }

    #[test]
    fn rem_euclid_wraps_negative_values() {
        let x = Rational::from_ratio(-1, 3);
        assert_eq!(x.rem_euclid_int(2), Rational::from_ratio(5, 3));
        assert!((Scalar::rem_euclid_int(&-0.25_f64, 2) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn integer_detection() {
        assert_eq!(Rational::from_ratio(6, 3).as_integer(0.0), Some(2));
        assert_eq!(Rational::from_ratio(7, 3).as_integer(0.5), None);
        assert_eq!(2.0000000001_f64.as_integer(1e-6), Some(2));
    }

    #[test]
    fn complex_magnitude_and_conjugate() {
        let z = Complex::new(Rational::from_int(3), Rational::from_int(4));
        assert_eq!(z.magnitude(), 5.0);
        assert_eq!(Field::conj(&z).im, Rational::from_int(-4));
    }
}
