//! Numeric types a protocol run can be carried out in.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Short name used in configs and trace headers.
    const NAME: &'static str;

    /// Lossless textual form, for types that have one.
    fn exact_repr(&self) -> Option<String> {
        None
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        Self::from_f64(x)
    }

    /// Reads a value written as a decimal (`0.25`, `1e-3`) or a fraction (`1/3`).
    fn parse_input(text: &str) -> Option<Self> {
        if let Ok(x) = text.trim().parse::<f64>() {
            return x.is_finite().then(|| Self::from_f64(x)).flatten();
        }
        parse_decimal(text).and_then(|r| r.to_f64()).and_then(Self::from_f64)
    }

    /// Arithmetic mean of a non-empty slice.
    fn mean(values: &[Self]) -> Self {
        let mut sum = Self::zero();
        let mut count = Self::zero();
        let mut lo = &values[0];
        let mut hi = &values[0];
        for v in values {
            sum = sum + v.clone();
            count = count + Self::one();
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        let m = sum / count;
        // float rounding can land a hair outside the inputs' range
        if &m < lo {
            lo.clone()
        } else if &m > hi {
            hi.clone()
        } else {
            m
        }
    }

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
}

impl Scalar for BigRational {
    const NAME: &'static str = "exact";

    fn exact_repr(&self) -> Option<String> {
        Some(self.to_string())
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        // short decimal inputs like 0.1 should land on 1/10, not the binary expansion
        let text = format!("{x}");
        parse_decimal(&text).or_else(|| BigRational::from_float(x))
    }

    fn parse_input(text: &str) -> Option<Self> {
        parse_decimal(text).or_else(|| text.trim().parse::<f64>().ok().and_then(Self::from_f64_lossy))
    }
}

/// Parse `"-12.5"`, `"3"`, or `"7/4"` as an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if text.contains(['e', 'E']) {
        return None;
    }
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let all: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(all, den);
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let r = parse_decimal("0.1").unwrap();
        assert_eq!(r, BigRational::new(1.into(), 10.into()));
        assert_eq!(parse_decimal("-2.50").unwrap(), BigRational::new((-5).into(), 2.into()));
        assert_eq!(parse_decimal("7/4").unwrap(), BigRational::new(7.into(), 4.into()));
        assert_eq!(parse_decimal("1e3"), None);
        assert_eq!(parse_decimal("1/0"), None);
        assert_eq!(BigRational::from_f64_lossy(0.3).unwrap(), parse_decimal("0.3").unwrap());
    }

    #[test]
    fn mean_and_gap() {
        assert_eq!(f64::mean(&[1.0, 2.0, 6.0]), 3.0);
        let third = 0.1f64 + 0.2;
        assert!(f64::mean(&[third; 3]) <= third);
        let xs: Vec<BigRational> = ["1", "2", "2"].iter().map(|s| parse_decimal(s).unwrap()).collect();
        assert_eq!(BigRational::mean(&xs), BigRational::new(5.into(), 3.into()));
        assert_eq!(3.0f32.abs_diff(&5.0), 2.0);
        assert_eq!(1.0f64.exact_repr(), None);
        assert_eq!(xs[0].exact_repr().as_deref(), Some("1"));
        assert_eq!(f64::parse_input("1/4"), Some(0.25));
        assert_eq!(f64::parse_input("nan"), None);
        assert_eq!(BigRational::parse_input("1e-3"), parse_decimal("0.001"));
    }
}
