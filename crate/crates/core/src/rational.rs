//! Exact rationals as they appear in input documents, plus p-adic valuations.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational that (de)serializes as either a JSON integer or a
/// string `"a/b"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::MalformedInput(format!("cannot parse rational {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(num, den)))
    }

    pub fn to_f64(&self) -> f64 {
        // Big numerators and denominators are scaled down together so that
        // huge-but-balanced fractions do not overflow to inf/inf.
        let num = self.0.numer();
        let den = self.0.denom();
        let shift = num.bits().max(den.bits()).saturating_sub(1000);
        let n: f64 = (num >> shift).to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = (den >> shift).to_string().parse().unwrap_or(f64::NAN);
        n / d
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RatVisitor;

        impl Visitor<'_> for RatVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a string \"a/b\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
                Rational::parse(v).map_err(E::custom)
            }
        }

        d.deserialize_any(RatVisitor)
    }
}

/// Largest k with p^k dividing n. `n` must be nonzero.
fn int_valuation(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut k = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        k += 1;
    }
    k
}

/// p-adic valuation of a nonzero rational; `None` for zero.
pub fn valuation(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    Some(int_valuation(q.numer(), p) - int_valuation(q.denom(), p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(Rational::parse("3").unwrap(), Rational::from_integer(3));
        assert_eq!(Rational::parse("-6/4").unwrap(), Rational::new(-3, 2));
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("x").is_err());
    }

    #[test]
    fn json_forms() {
        let v: Vec<Rational> = serde_json::from_str(r#"[2, "1/3", -5]"#).unwrap();
        assert_eq!(v[1], Rational::new(1, 3));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["2","1/3","-5"]"#);
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&Rational::new(18, 5).0, 3), Some(2));
        assert_eq!(valuation(&Rational::new(5, 9).0, 3), Some(-2));
        assert_eq!(valuation(&Rational::zero().0, 3), None);
        assert_eq!(valuation(&Rational::from_integer(-7).0, 7), Some(1));
    }

    #[test]
    fn float_conversion() {
        assert_eq!(Rational::new(3, 64).to_f64(), 3.0 / 64.0);
    }
}
