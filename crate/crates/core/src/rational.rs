//! Exact rational arithmetic shared by all solvers.
//!
//! Every quantity handled by this crate (processing times, weights, rates,
//! clock times, cut capacities, objectives) is a [`Rat`]: an
//! arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. All arithmetic and comparisons are exact, so golden outputs
//! and invariant checks can use `==` rather than tolerances.
//!
//! In JSON, rationals are accepted as integers or as strings `"a"` / `"a/b"`
//! and are always emitted as strings in lowest terms (`"6"`, `"9/2"`).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Rational from a machine integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics if `d == 0`; intended for literals in tests and
/// examples.
pub fn ratio(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a"` or `"a/b"` with `b > 0` into a rational in lowest terms.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let s = text.trim();
    let invalid = |reason: &str| Error::InvalidRational {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    if s.is_empty() {
        return Err(invalid("empty string"));
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let numer: BigInt = n.parse().map_err(|_| invalid("invalid numerator"))?;
            let denom: BigInt = d.parse().map_err(|_| invalid("invalid denominator"))?;
            if denom.is_zero() {
                return Err(invalid("zero denominator"));
            }
            if denom.is_negative() {
                return Err(invalid("denominator must be positive"));
            }
            Ok(Rat::new(numer, denom))
        }
        None => {
            let numer: BigInt = s.parse().map_err(|_| invalid("not an integer"))?;
            Ok(Rat::from_integer(numer))
        }
    }
}

/// Renders a rational in lowest terms: `"a"` when the denominator is 1,
/// otherwise `"a/b"`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Bit length of the denominator (0 for a zero denominator never occurs;
/// `bits(1) == 1`). Used by the encoding-length instrumentation.
pub fn denominator_bits(r: &Rat) -> u64 {
    r.denom().bits()
}

/// Renders a rational as a plain decimal string with the given number of
/// significant digits, using exact integer arithmetic (round half up).
/// Intended for CSV export only; JSON stays exact.
pub fn format_decimal(r: &Rat, significant: u32) -> String {
    assert!(significant > 0);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();

    // Number of digits in the integer part.
    let int_part = &num / &den;
    let int_digits = if int_part.is_zero() {
        0
    } else {
        int_part.to_string().len() as i64
    };

    // Leading zeros after the point for values < 1.
    let mut lead_zeros = 0i64;
    if int_part.is_zero() {
        let ten = BigInt::from(10);
        let mut scaled = num.clone() * &ten;
        while &scaled / &den == BigInt::zero() {
            lead_zeros += 1;
            scaled *= &ten;
        }
    }

    let frac_digits = if int_digits > 0 {
        (significant as i64 - int_digits).max(0)
    } else {
        lead_zeros + significant as i64
    };

    // Round num/den * 10^frac_digits half up.
    let pow = BigInt::from(10).pow(frac_digits as u32);
    let scaled: BigInt = (&num * &pow * 2 + &den) / (&den * 2);
    let digits = scaled.to_string();

    let mut s = if frac_digits == 0 {
        digits
    } else {
        let frac_len = frac_digits as usize;
        let padded = if digits.len() <= frac_len {
            format!("{}{}", "0".repeat(frac_len + 1 - digits.len()), digits)
        } else {
            digits
        };
        let split = padded.len() - frac_len;
        let (int_s, frac_s) = padded.split_at(split);
        let frac_s = frac_s.trim_end_matches('0');
        if frac_s.is_empty() {
            int_s.to_string()
        } else {
            format!("{int_s}.{frac_s}")
        }
    };
    if negative {
        s = format!("-{s}");
    }
    s
}

/// JSON wrapper for [`Rat`]: deserializes from an integer or `"a/b"` string,
/// serializes as a lowest-terms string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonRat(pub Rat);

impl Serialize for JsonRat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rat(&self.0))
    }
}

struct JsonRatVisitor;

impl Visitor<'_> for JsonRatVisitor {
    type Value = JsonRat;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an integer or a rational string \"a/b\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<JsonRat, E> {
        Ok(JsonRat(rat(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<JsonRat, E> {
        Ok(JsonRat(Rat::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<JsonRat, E> {
        Err(E::custom(format!(
            "floating-point literal {v} is not exact; use an integer or \"a/b\" string"
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<JsonRat, E> {
        parse_rat(v).map(JsonRat).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for JsonRat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<JsonRat, D::Error> {
        deserializer.deserialize_any(JsonRatVisitor)
    }
}
