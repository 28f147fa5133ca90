//! Scalar traits shared by the exact and floating-point code paths.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, Signed, ToPrimitive};

/// Field elements usable in forms and symmetric matrices.
///
/// Implemented for `f32`, `f64` and `BigRational`. Everything that only needs
/// ring/field operations (Gram map, kernel construction, adjugates, the Q(w)
/// calculus) is written against this trait so the same code runs exactly.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Signed + Send + Sync + 'static
{
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// Nearest `f64`, used for reporting and tolerance checks.
    fn to_f64(&self) -> f64;
}

/// Floating-point scalars for the numerical code (eigen, roots, SVD).
pub trait Real: Scalar + Float + FloatConst + FromPrimitive + NumAssign + Copy {
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Real for f64 {}
impl Real for f32 {}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"-0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(p));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    if digits.is_empty() {
        return None;
    }
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Formats a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/4"), Some(BigRational::from_ratio(3, 4)));
        assert_eq!(parse_rational("-2"), Some(BigRational::from_ratio(-2, 1)));
        assert_eq!(parse_rational("-0.25"), Some(BigRational::from_ratio(-1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(format_rational(&BigRational::from_ratio(6, -4)), "-3/2");
    }

    #[test]
    fn float_to_rational_is_exact() {
        let r = rational_from_f64(0.1);
        assert_eq!(Scalar::to_f64(&r), 0.1);
    }
}
