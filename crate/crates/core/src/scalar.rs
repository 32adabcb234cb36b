//! Scalar abstractions shared by the exact and floating-point code paths.
//!
//! Everything algebraic in this crate is written against [`Ring`] or
//! [`Field`]. The exact pipeline instantiates them with [`Rational`]; the
//! numerical modules reuse the same polynomial and matrix code with `f64`
//! and [`Complex64`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Arbitrary-precision rational number, always kept in lowest terms.
pub type Rational = BigRational;

/// Commutative ring with identity.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
{
}

/// A field that contains the integers (characteristic zero).
pub trait Field: Ring + Div<Output = Self> {
    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Lossy conversion used when exact data feeds numerical code.
    fn to_c64(&self) -> Complex64;

    /// Whether `p` has no repeated factor.
    fn poly_is_squarefree(p: &Poly<Self>) -> bool {
        p.is_squarefree()
    }
}

impl Field for Rational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn poly_is_squarefree(p: &Poly<Self>) -> bool {
        crate::poly::rational_is_squarefree(p)
    }
}

impl Field for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Field for Complex64 {
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Builds `num/den` as a reduced rational.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(v) => v,
        // Huge numerator and denominator: scale both down by the same power of two.
        None => {
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Canonical string form: `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"` or `"p"` with an optional leading sign (`-`, `+` or U+2212).
///
/// Decimal and exponent notation are rejected so that no float can leak into
/// the exact pipeline.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.contains(['.', 'e', 'E']) && !s.is_empty() {
        return Err(Error::Parse(format!(
            "floats rejected; use p/q (got {text:?})"
        )));
    }
    let (negative, body) = if let Some(rest) = s.strip_prefix('\u{2212}') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (false, rest)
    } else {
        (false, s)
    };
    let digits = |part: &str| -> Result<BigInt> {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("malformed rational {text:?}")));
        }
        part.parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("malformed rational {text:?}: {e}")))
    };
    let (num, den) = match body.split_once('/') {
        Some((p, q)) => (digits(p)?, digits(q)?),
        None => (digits(body)?, BigInt::one()),
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    let value = BigRational::new(num, den);
    Ok(if negative { -value } else { value })
}

/// Size of a rational in bits, handy for reporting growth.
pub fn rational_bits(r: &Rational) -> u64 {
    r.numer().abs().bits() + r.denom().bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_canonical() {
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&rat(-6, 3)), "-2");
        assert_eq!(format_rational(&rat(0, 7)), "0");
        assert_eq!(format_rational(&rat(3, -9)), "-1/3");
    }

    #[test]
    fn parse_accepts_signs() {
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("\u{2212}5").unwrap(), rat(-5, 1));
        assert_eq!(parse_rational(" +7/1 ").unwrap(), rat(7, 1));
    }

    #[test]
    fn parse_rejects_floats_and_garbage() {
        let err = parse_rational("0.5").unwrap_err().to_string();
        assert!(err.contains("floats rejected"), "{err}");
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(3) * BigInt::from(10).pow(400);
        let r = BigRational::new(big.clone(), big * BigInt::from(4));
        assert!((rational_to_f64(&r) - 0.25).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn string_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = rat(p, q);
            let s = format_rational(&r);
            proptest::prop_assert_eq!(parse_rational(&s).unwrap(), r.clone());
            proptest::prop_assert_eq!(format_rational(&parse_rational(&s).unwrap()), s);
        }
    }
}
