//! Exact rational helpers: decimal-string parsing and formatting.
//!
//! Config values travel as decimal strings so nothing passes through binary
//! floating point on its way to a `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecimalError {
    #[error("empty decimal string")]
    Empty,
    #[error("invalid decimal string {0:?}")]
    Invalid(String),
}

/// Parses strings like "2", "-0.75", "1.5e3", "14/3" into exact rationals.
pub fn parse_decimal(s: &str) -> Result<BigRational, DecimalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(DecimalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num)?;
        let d = parse_decimal(den)?;
        if d.is_zero() {
            return Err(DecimalError::Invalid(s.to_string()));
        }
        return Ok(n / d);
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e
                .parse()
                .map_err(|_| DecimalError::Invalid(s.to_string()))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(DecimalError::Invalid(s.to_string()));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(DecimalError::Invalid(s.to_string()));
    }
    let joined = format!("{int_part}{frac_part}");
    let value: BigInt = joined
        .parse()
        .map_err(|_| DecimalError::Invalid(s.to_string()))?;
    let mut r = BigRational::from_integer(value * BigInt::from(sign));
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    if shift > 0 {
        r *= BigRational::from_integer(ten.pow(shift as u32));
    } else if shift < 0 {
        r /= BigRational::from_integer(ten.pow((-shift) as u32));
    }
    Ok(r)
}

/// Exact rendering: integers plainly, other rationals as "p/q".
pub fn format_exact(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floor of a rational as BigInt.
pub fn floor(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

/// Ceiling of a rational as BigInt.
pub fn ceil(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Nearest integer, ties toward negative infinity.
pub fn round_half_down(r: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    // floor(r + 1/2) rounds halves up; subtract one on exact ties.
    let shifted = r + &half;
    let fl = floor(&shifted);
    if shifted == BigRational::from_integer(fl.clone()) {
        fl - BigInt::one()
    } else {
        fl
    }
}

/// Nearest integer, ties away from zero.
pub fn round_half_away(r: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if r.is_negative() {
        -round_half_away(&-r.clone())
    } else {
        floor(&(r + half))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_basic_forms() {
        assert_eq!(parse_decimal("2").unwrap(), ratio(2, 1));
        assert_eq!(parse_decimal("-0.75").unwrap(), ratio(-3, 4));
        assert_eq!(parse_decimal("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse_decimal("1.5e3").unwrap(), ratio(1500, 1));
        assert_eq!(parse_decimal("25e-2").unwrap(), ratio(1, 4));
        assert_eq!(parse_decimal("14/3").unwrap(), ratio(14, 3));
        assert_eq!(parse_decimal(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "--1", "1/0", "."] {
            assert!(parse_decimal(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn format_roundtrip() {
        for r in [ratio(14, 3), ratio(-7, 2), ratio(5, 1)] {
            assert_eq!(parse_decimal(&format_exact(&r)).unwrap(), r);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exact_format_roundtrip(n in -100000i64..100000, d in 1i64..10000) {
                let r = BigRational::new(BigInt::from(n), BigInt::from(d));
                prop_assert_eq!(parse_decimal(&format_exact(&r)).unwrap(), r);
            }

            #[test]
            fn decimal_strings_parse(int_part in 0u64..1000000, frac in 0u64..1000000) {
                let s = format!("{int_part}.{frac:06}");
                let r = parse_decimal(&s).unwrap();
                let scaled = &r * BigRational::from_integer(BigInt::from(1000000u64));
                prop_assert!(scaled.is_integer());
            }
        }
    }

    #[test]
    fn rounding_ties() {
        assert_eq!(round_half_down(&ratio(7, 2)), BigInt::from(3));
        assert_eq!(round_half_down(&ratio(-7, 2)), BigInt::from(-4));
        assert_eq!(round_half_away(&ratio(7, 2)), BigInt::from(4));
        assert_eq!(round_half_away(&ratio(-7, 2)), BigInt::from(-4));
        assert_eq!(round_half_away(&ratio(299, 100)), BigInt::from(3));
    }
}
