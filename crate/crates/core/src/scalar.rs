//! Numeric modes: every table in the crate is generic over [`Scalar`], which
//! is implemented for `f64` and for exact big-integer fractions.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arithmetic mode of an MDP and of everything computed from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Float,
    Rational,
}

impl NumericMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NumericMode::Float => "float",
            NumericMode::Rational => "rational",
        }
    }
}

impl Display for NumericMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NumericMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(NumericMode::Float),
            "rational" => Ok(NumericMode::Rational),
            other => Err(format!("unknown numeric mode `{other}`")),
        }
    }
}

/// Field the tables are built over.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    const MODE: NumericMode;

    /// Slack allowed when checking that a distribution sums to one.
    fn row_tolerance() -> Self;

    /// Parses a file literal: integer, decimal or `p/q` fraction.
    fn parse_literal(text: &str) -> Result<Self, String>;

    /// Serialized form written back to files.
    fn to_json(&self) -> serde_json::Value;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).unwrap() / Self::from_i64(den).unwrap()
    }

    fn is_finite_value(&self) -> bool;
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn row_tolerance() -> Self {
        1e-12
    }

    fn parse_literal(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator in `{text}`"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in `{text}`"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in `{text}`"));
            }
            Ok(num / den)
        } else {
            text.parse().map_err(|_| format!("`{text}` is not a number"))
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    const MODE: NumericMode = NumericMode::Rational;

    fn row_tolerance() -> Self {
        BigRational::zero()
    }

    fn parse_literal(text: &str) -> Result<Self, String> {
        parse_rational(text)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Exact parse of `p/q`, integers and plain decimals (`0.125`, `-3.5e-2`).
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty numeric literal".into());
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| format!("bad numerator in `{text}`"))?;
        let den = BigInt::from_str(den.trim()).map_err(|_| format!("bad denominator in `{text}`"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{text}`"));
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..]
                .parse()
                .map_err(|_| format!("bad exponent in `{text}`"))?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" || digits.is_empty() {
        return Err(format!("`{text}` is not a number"));
    } else {
        digits
    };
    let numer = BigInt::from_str(&digits).map_err(|_| format!("`{text}` is not a number"))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Largest integer representable exactly in an `f64` mantissa.
pub fn float_exact_limit() -> BigRational {
    BigRational::from_integer(BigInt::from(1u64 << 53))
}

/// Converts a rational to f64, refusing magnitudes beyond 2^53 and
/// values whose f64 image is not finite.
pub fn rational_to_f64_checked(value: &BigRational) -> Option<f64> {
    if value.abs() > float_exact_limit() {
        return None;
    }
    value.to_f64().filter(|v| v.is_finite())
}

/// Sum of a slice, in index order.
pub fn sum<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_exactly() {
        let q = parse_rational("1/36").unwrap();
        assert_eq!(q, BigRational::new(1.into(), 36.into()));
        assert_eq!(parse_rational("2/72").unwrap(), q);
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.125").unwrap(), BigRational::new(1.into(), 8.into()));
        assert_eq!(parse_rational("-3.5e-2").unwrap(), BigRational::new((-7).into(), 200.into()));
        assert_eq!(parse_rational("12").unwrap(), BigRational::from_integer(12.into()));
        assert_eq!(parse_rational("1e3").unwrap(), BigRational::from_integer(1000.into()));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(f64::parse_literal("1/0").is_err());
    }

    #[test]
    fn float_literal_accepts_fractions() {
        assert_eq!(f64::parse_literal("1/4").unwrap(), 0.25);
        assert_eq!(f64::parse_literal(" 0.5 ").unwrap(), 0.5);
    }

    #[test]
    fn checked_conversion_refuses_huge_values() {
        let big = BigRational::from_integer(BigInt::from(6u32).pow(60));
        assert!(rational_to_f64_checked(&big).is_none());
        assert_eq!(rational_to_f64_checked(&BigRational::new(1.into(), 4.into())), Some(0.25));
    }
}
