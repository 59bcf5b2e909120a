//! Exact fractions used for `tau(M)`, average radii and LP certificates.
//!
//! Backed by `num_rational::BigRational`, which keeps every value reduced with
//! a positive denominator.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Formats as `p/q`, always including the denominator.
pub fn to_fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`. Decimal notation is rejected.
pub fn parse_fraction(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite `f64`.
pub fn from_f64_exact(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn pow(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc *= base;
        }
        acc
    } else {
        pow(&base.recip(), -exp)
    }
}

/// Serde adapter writing a rational as its `p/q` string.
pub mod as_fraction {
    use super::{parse_fraction, to_fraction_string, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_fraction_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_fraction(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_strings() {
        assert_eq!(to_fraction_string(&ratio(2, 4)), "1/2");
        assert_eq!(to_fraction_string(&int(1)), "1/1");
        assert_eq!(parse_fraction("1083/3467").unwrap(), ratio(1083, 3467));
        assert_eq!(parse_fraction("6/-4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_fraction("7").unwrap(), int(7));
        assert!(parse_fraction("0.5").is_err());
        assert!(parse_fraction("1/0").is_err());
    }

    #[test]
    fn exact_float_conversion() {
        assert_eq!(from_f64_exact(0.375), ratio(3, 8));
        assert_eq!(pow(&ratio(2, 3), -2), ratio(9, 4));
    }
}
