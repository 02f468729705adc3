//! Exact rational parsing, formatting, and float rounding helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty value")]
    Empty,
    #[error("invalid rational `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses either an exact fraction `num/den` or a decimal such as `0.25`,
/// `-3`, or `2.5e-1`. Decimals convert exactly (base-10 scaling).
pub fn parse_rational(text: &str) -> Result<BigRational, RationalParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(RationalParseError::Empty);
    }
    if let Some((num, den)) = trimmed.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| RationalParseError::Invalid(text.to_string()))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| RationalParseError::Invalid(text.to_string()))?;
        if den.is_zero() {
            return Err(RationalParseError::ZeroDenominator(text.to_string()));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(trimmed).ok_or_else(|| RationalParseError::Invalid(text.to_string()))
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
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
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let mut numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    if sign < 0 {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow(scale.unsigned_abs()))
    };
    Some(value)
}

/// Canonical `num/den` form, always carrying the denominator (`0/1`, `-1/2`).
pub fn format_rational(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        value.numer().to_f64().unwrap_or(f64::NAN) / value.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Nearest continued-fraction convergent of `value` with denominator at
/// most `max_denominator`. Used to turn float LP output into exact
/// certificate candidates; callers must re-verify exactly.
pub fn approximate_rational(value: f64, max_denominator: u64) -> BigRational {
    assert!(max_denominator >= 1);
    if !value.is_finite() {
        return BigRational::zero();
    }
    let negative = value < 0.0;
    let mut x = value.abs();

    // Convergents h/k of the continued fraction of |value|.
    let (mut h_prev, mut k_prev) = (BigInt::one(), BigInt::zero());
    let (mut h, mut k) = (BigInt::from(x.floor() as i64), BigInt::one());
    let cap = BigInt::from(max_denominator);
    loop {
        let frac = x - x.floor();
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
        let term = BigInt::from(x.floor() as i64);
        let h_next = &term * &h + &h_prev;
        let k_next = &term * &k + &k_prev;
        if k_next > cap {
            break;
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
    }
    let mut out = BigRational::new(h, k);
    if negative {
        out = -out;
    }
    out
}

/// Sum of the absolute values of the negative entries.
pub fn negative_mass<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigRational {
    let mut total = BigRational::zero();
    for v in values {
        if v.is_negative() {
            total -= v;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("1e3").unwrap(), rat(1000, 1));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/2").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_with_explicit_denominator() {
        assert_eq!(format_rational(&rat(0, 1)), "0/1");
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
        assert_eq!(format_rational(&rat(3, 1)), "3/1");
    }

    #[test]
    fn approximates_floats_by_convergents() {
        assert_eq!(approximate_rational(0.5, 1_000_000_000), rat(1, 2));
        assert_eq!(approximate_rational(-0.25, 1_000_000_000), rat(-1, 4));
        assert_eq!(approximate_rational(1.0 / 3.0, 1000), rat(1, 3));
        let r = approximate_rational(std::f64::consts::FRAC_1_SQRT_2, 1_000_000_000);
        assert!((to_f64(&r) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn negative_mass_sums_only_negatives() {
        let values = [rat(1, 2), rat(-1, 3), rat(-1, 6)];
        assert_eq!(negative_mass(values.iter()), rat(1, 2));
    }
}
