//! Exact rational numbers and their `num/den` text form.
//!
//! Every Gödel value, partition endpoint, branch parameter and network weight
//! is carried as a [`Rational`]. On the wire they are always written as
//! `num/den` (denominator included even when it is 1), never as decimals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {literal:?}")]
pub struct ParseRationalError {
    pub literal: String,
}

/// Builds `num/den` from machine-sized integers. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn from_usize(value: usize) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `base^-exp` as an exact rational.
pub fn inv_pow(base: usize, exp: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(base).pow(exp))
}

/// Formats as `num/den`, always including the denominator.
pub fn to_ratio_string(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `num/den` or a bare integer. The result is reduced.
pub fn parse_ratio(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        literal: text.to_string(),
    };
    let trimmed = text.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Number of bits in the denominator (at least 1).
pub fn denominator_bits(value: &Rational) -> u64 {
    value.denom().bits().max(1)
}

pub fn is_unit_interval_open(value: &Rational) -> bool {
    !value.is_negative() && value < &Rational::one()
}

/// Serde adapter writing a [`Rational`] as a `num/den` string.
pub mod serde_ratio {
    use super::{parse_ratio, to_ratio_string, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&to_ratio_string(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_ratio(&text).map_err(D::Error::custom)
    }
}
