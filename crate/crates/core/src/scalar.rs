//! Numeric abstraction shared by the LP solver and the game domains.
//!
//! Every solver in this crate is written against [`Scalar`]. Exact rationals
//! ([`crate::Rational`]) compare exactly; the floating point impls treat
//! values within a small absolute tolerance of zero as zero so that the
//! simplex method terminates on round-off noise.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a number: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: String,
}

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Sign with the type's zero tolerance applied.
    fn sign(&self) -> Ordering;

    fn to_f64_lossy(&self) -> f64;

    /// Parses `"p/q"`, an integer, or a decimal literal.
    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError>;

    fn is_zero_tol(&self) -> bool {
        self.sign() == Ordering::Equal
    }

    fn is_positive_tol(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    fn is_negative_tol(&self) -> bool {
        self.sign() == Ordering::Less
    }

    fn from_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits every scalar type")
    }
}

impl Scalar for BigRational {
    fn sign(&self) -> Ordering {
        self.cmp(&BigRational::zero())
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            // numerator/denominator individually overflow f64
            let n = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s)
    }
}

impl Scalar for f64 {
    fn sign(&self) -> Ordering {
        const TOL: f64 = 1e-9;
        if *self > TOL {
            Ordering::Greater
        } else if *self < -TOL {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s).map(|q| q.to_f64_lossy())
    }
}

impl Scalar for f32 {
    fn sign(&self) -> Ordering {
        const TOL: f32 = 1e-5;
        if *self > TOL {
            Ordering::Greater
        } else if *self < -TOL {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }

    fn parse_scalar(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s).map(|q| q.to_f64_lossy() as f32)
    }
}

/// Parses `"p/q"`, `"p"`, or a finite decimal such as `"0.25"` into an exact
/// rational. A zero denominator is rejected.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let err = |reason: &str| ParseScalarError {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err("bad numerator"))?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(err("bad decimal literal"));
        }
        let digits = format!("{int_digits}{frac_part}");
        let mut num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| err("bad decimal literal"))?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
        return Ok(BigRational::new(num, den));
    }
    BigInt::from_str(t)
        .map(BigRational::from_integer)
        .map_err(|_| err("not a rational literal"))
}

/// Renders a rational as `"p/q"`, or `"p"` when integral.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Serde adapter for [`BigRational`] as a `"p/q"` string.
pub mod rational_str {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| parse_rational(s).map_err(de::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_some(&format_rational(q)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<BigRational>, D::Error> {
            let raw = Option::<String>::deserialize(d)?;
            raw.map(|s| parse_rational(&s).map_err(de::Error::custom))
                .transpose()
        }
    }

    pub mod vec_option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<BigRational>>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.iter().map(format_rational).collect::<Vec<_>>()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigRational>>, D::Error> {
            let raw = Option::<Vec<String>>::deserialize(d)?;
            raw.map(|v| {
                v.iter()
                    .map(|s| parse_rational(s).map_err(de::Error::custom))
                    .collect()
            })
            .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("3/6").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), rational_int(-4));
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rational(-3, 2));
    }

    #[test]
    fn rejects_zero_denominator_and_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["7", "-2/3", "0", "5/4"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn float_sign_uses_tolerance() {
        assert_eq!(1e-12f64.sign(), Ordering::Equal);
        assert_eq!((-0.5f64).sign(), Ordering::Less);
        assert_eq!(rational(1, 1_000_000_000_000).sign(), Ordering::Greater);
    }
}
