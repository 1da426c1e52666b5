//! Exact rational numbers and their text form.
//!
//! Every rational that leaves the library is written as `"num/den"`, with an
//! explicit denominator even for integers (`"-4/1"`). Parsing also accepts a
//! bare integer or a finite decimal (`"0.001"` reads as `1/1000`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {text:?}: {reason}")]
pub struct RationalParseError {
    pub text: String,
    pub reason: &'static str,
}

fn parse_error(text: &str, reason: &'static str) -> RationalParseError {
    RationalParseError {
        text: text.to_string(),
        reason,
    }
}

/// Writes `r` as `"num/den"` in lowest terms.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(parse_error(text, "empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| parse_error(text, "bad numerator"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| parse_error(text, "bad denominator"))?;
        if den.is_zero() {
            return Err(parse_error(text, "zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        if frac_part.is_empty() && digits.is_empty() {
            return Err(parse_error(text, "no digits"));
        }
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !digits.chars().all(|c| c.is_ascii_digit())
        {
            return Err(parse_error(text, "bad decimal"));
        }
        let whole: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| parse_error(text, "bad decimal"))?
        };
        let frac: BigInt = if frac_part.is_empty() {
            BigInt::zero()
        } else {
            frac_part
                .parse()
                .map_err(|_| parse_error(text, "bad decimal"))?
        };
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let magnitude = Rational::new(whole * &scale + frac, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let int: BigInt = s.parse().map_err(|_| parse_error(text, "not a number"))?;
    Ok(Rational::from_integer(int))
}

pub fn rational_from_i64(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out of f64 range: saturate with the correct sign.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
