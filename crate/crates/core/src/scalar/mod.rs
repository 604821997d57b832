//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Exact scalars (`Rational`, `Surd`) make every equality in the certificates
//! structural; floating scalars (`f64`, `f32`) treat values within `TOL` of
//! zero as zero.

mod surd;

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use surd::Surd;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse scalar from {0:?}")]
pub struct ParseScalarError(pub String);

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic is exact; exact types use `TOL == 0`.
    const EXACT: bool;
    /// Absolute zero tolerance used by `sign`.
    const TOL: f64;

    fn from_rational(q: &BigRational) -> Self;

    /// Converts an exact surd, `None` when the type cannot represent it.
    fn from_surd(s: &Surd) -> Option<Self>;

    /// Square root, `None` when negative or not representable.
    fn sqrt(&self) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// JSON encoding: exact values as strings, floats as numbers.
    fn to_json(&self) -> serde_json::Value;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn ratio(p: i64, q: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    fn parse_value(text: &str) -> Result<Self, ParseScalarError> {
        let s: Surd = text.parse()?;
        Self::from_surd(&s).ok_or_else(|| ParseScalarError(text.to_string()))
    }

    fn from_json(v: &serde_json::Value) -> Result<Self, ParseScalarError> {
        match v {
            serde_json::Value::String(s) => Self::parse_value(s),
            serde_json::Value::Number(n) => Self::parse_value(&n.to_string()),
            other => Err(ParseScalarError(other.to_string())),
        }
    }

    /// Sign, with floats treating `|x| <= TOL` as zero.
    fn sign(&self) -> Ordering {
        if Self::EXACT {
            self.partial_cmp(&Self::zero()).unwrap_or(Ordering::Equal)
        } else {
            let v = self.to_f64();
            if v.abs() <= Self::TOL {
                Ordering::Equal
            } else if v > 0.0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }

    fn is_negligible(&self) -> bool {
        self.sign() == Ordering::Equal
    }

    /// `self` compared with `other` up to tolerance.
    fn cmp_tol(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).sign()
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

pub type Rational = BigRational;

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            const TOL: f64 = $tol;

            fn from_rational(q: &BigRational) -> Self {
                ToPrimitive::to_f64(q).unwrap_or(f64::NAN) as $t
            }

            fn from_surd(s: &Surd) -> Option<Self> {
                Some(s.to_f64() as $t)
            }

            fn sqrt(&self) -> Option<Self> {
                if *self < 0.0 {
                    None
                } else {
                    Some(<$t>::sqrt(*self))
                }
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_json(&self) -> serde_json::Value {
                serde_json::Number::from_f64(*self as f64)
                    .map(serde_json::Value::Number)
                    .unwrap_or(serde_json::Value::Null)
            }

            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-4);

impl Scalar for BigRational {
    const EXACT: bool = true;
    const TOL: f64 = 0.0;

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn from_surd(s: &Surd) -> Option<Self> {
        s.to_rational()
    }

    fn sqrt(&self) -> Option<Self> {
        Surd::sqrt_rational(self)?.to_rational()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

impl Scalar for Surd {
    const EXACT: bool = true;
    const TOL: f64 = 0.0;

    fn from_rational(q: &BigRational) -> Self {
        Surd::from_rational(q.clone())
    }

    fn from_surd(s: &Surd) -> Option<Self> {
        Some(s.clone())
    }

    fn sqrt(&self) -> Option<Self> {
        Surd::sqrt(self)
    }

    fn to_f64(&self) -> f64 {
        Surd::to_f64(self)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    fn sign(&self) -> Ordering {
        self.signum_ord()
    }
}

/// Converts between scalar types through the exact surd form when possible,
/// otherwise through `f64`.
pub fn convert<S: Scalar, T: Scalar>(v: &S) -> T {
    if S::EXACT {
        if let Ok(s) = v.to_string().parse::<Surd>() {
            if let Some(t) = T::from_surd(&s) {
                return t;
            }
        }
    }
    T::from_surd(&Surd::from_rational(
        BigRational::from_float(v.to_f64()).unwrap_or_else(BigRational::zero),
    ))
    .expect("rational values convert into every scalar")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_into_each_scalar() {
        assert_eq!(f64::parse_value("1/4").unwrap(), 0.25);
        assert_eq!(
            Rational::parse_value("3/6").unwrap(),
            Rational::new(1.into(), 2.into())
        );
        assert!(Rational::parse_value("sqrt(2)").is_err());
        assert!((f64::parse_value("sqrt(2)").unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Surd::parse_value("sqrt(8)").unwrap().to_string(), "2*sqrt(2)");
    }

    #[test]
    fn float_sign_uses_tolerance() {
        assert_eq!(1e-12f64.sign(), Ordering::Equal);
        assert_eq!((-1e-3f64).sign(), Ordering::Less);
        assert_eq!(Rational::ratio(-1, 1000000).sign(), Ordering::Less);
    }

    #[test]
    fn sqrt_per_type() {
        assert_eq!(Rational::ratio(9, 4).sqrt(), Some(Rational::ratio(3, 2)));
        assert_eq!(Rational::ratio(2, 1).sqrt(), None);
        assert_eq!(Surd::ratio(2, 1).sqrt().unwrap().to_string(), "sqrt(2)");
        assert_eq!(Scalar::sqrt(&4.0f64), Some(2.0));
    }

    #[test]
    fn conversion_between_types() {
        let s = Surd::parse_value("1/3 + sqrt(2)").unwrap();
        let f: f64 = convert(&s);
        assert!((f - (1.0 / 3.0 + 2f64.sqrt())).abs() < 1e-15);
        let r: Rational = convert(&Surd::ratio(5, 7));
        assert_eq!(r, Rational::ratio(5, 7));
        let back: Rational = convert(&0.5f64);
        assert_eq!(back, Rational::ratio(1, 2));
    }
}
