//! Rational parsing and rendering.
//!
//! Every exact quantity is a [`Rational`]. The canonical text form is
//! `"num/den"` in lowest terms with a positive denominator; the parser also
//! accepts bare integers and finite decimals such as `0.25`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"a/b"`, `"a"` or a finite decimal like `"-1.25"`.
pub fn parse(input: &str) -> Result<Rational> {
    let s = input.trim();
    let err = || Error::Parse {
        what: "rational",
        input: input.to_string(),
    };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() && whole_digits.is_empty() {
            return Err(err());
        }
        if !whole_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{whole_digits}{frac}");
        let mantissa: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| err())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Canonical `"num/den"` rendering; integers keep an explicit `/1`.
pub fn render(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Float rendering with 12 significant digits, trailing zeros trimmed.
pub fn render_float(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let formatted = format!("{:.*e}", 11, value);
    let (mantissa, exponent) = formatted.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("exponent digits");
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        let fixed = format!("{:.*}", decimals, value);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse("3/10").unwrap(), ratio(3, 10));
        assert_eq!(parse(" 2/4 ").unwrap(), ratio(1, 2));
        assert_eq!(parse("1").unwrap(), int(1));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse("1.").unwrap(), int(1));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "a/2", "0.2.3", ".", "1e3", "--1"] {
            assert!(parse(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn render_is_lowest_terms() {
        assert_eq!(render(&ratio(2, 4)), "1/2");
        assert_eq!(render(&int(1)), "1/1");
        assert_eq!(render(&zero()), "0/1");
        assert_eq!(render(&ratio(3, -6)), "-1/2");
    }

    #[test]
    fn float_rendering_uses_twelve_significant_digits() {
        assert_eq!(render_float(80.2), "80.2");
        assert_eq!(render_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(render_float(0.0), "0");
        assert_eq!(render_float(401.0), "401");
        assert_eq!(render_float(2.0e-9), "2e-9");
    }
}
