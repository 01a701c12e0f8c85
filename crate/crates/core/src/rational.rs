//! Rendering and parsing of exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `num/den` in lowest terms; integers render as `n/1`.
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `a/b`, `a` or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let q = BigRational::new(n, BigInt::from(10u32).pow(frac.len() as u32));
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

/// ⌊log10 |q]⌋ for q ≠ 0.
fn decimal_exponent(a: &BigInt, b: &BigInt) -> i64 {
    let mut e = ((a.bits() as i64 - b.bits() as i64) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    // a/b >= 10^e  <=>  a * 10^-e >= b
    let ge = |e: i64| -> bool {
        if e >= 0 {
            a >= &(b * pow10(e as u32))
        } else {
            &(a * pow10((-e) as u32)) >= b
        }
    };
    while !ge(e) {
        e -= 1;
    }
    while ge(e + 1) {
        e += 1;
    }
    e
}

/// `sig` significant digits, rounded half away from zero. Magnitudes in
/// [1e-4, 1e15) print positionally, others in scientific notation.
pub fn decimal(q: &BigRational, sig: usize) -> String {
    assert!(sig >= 1);
    if q.is_zero() {
        return "0".to_string();
    }
    let neg = q.is_negative();
    let a = q.numer().abs();
    let b = q.denom().clone();
    let mut e = decimal_exponent(&a, &b);
    let shift = sig as i64 - 1 - e;
    let (num, den) = if shift >= 0 {
        (a * pow10(shift as u32), b)
    } else {
        (a, b * pow10((-shift) as u32))
    };
    let (mut m, r) = num.div_rem(&den);
    if r * 2u32 >= den {
        m += 1u32;
    }
    let mut digits = m.to_string();
    if digits.len() > sig {
        digits.truncate(sig);
        e += 1;
    }
    let body = if (-4..15).contains(&e) {
        if e >= 0 {
            let int_len = e as usize + 1;
            if digits.len() <= int_len {
                format!("{digits}{}", "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
        }
    } else if digits.len() == 1 {
        format!("{digits}e{e}")
    } else {
        format!("{}.{}e{e}", &digits[..1], &digits[1..])
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Truncates (toward zero) to `places` digits after the decimal point.
pub fn truncate_places(q: &BigRational, places: u32) -> BigRational {
    let scale = pow10(places);
    let t = (q * BigRational::from_integer(scale.clone())).trunc();
    t / BigRational::from_integer(scale)
}

/// Rounds half away from zero to `places` digits after the decimal point.
pub fn round_places(q: &BigRational, places: u32) -> BigRational {
    let scale = BigRational::from_integer(pow10(places));
    (q * &scale).round() / scale
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

/// Serde adapter storing a rational as its `num/den` string.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_fifteen_digits() {
        assert_eq!(decimal(&ratio(15, 49), 15), "0.306122448979592");
        assert_eq!(decimal(&ratio(-1, 8), 15), "-0.125000000000000");
        assert_eq!(decimal(&ratio(75, 1), 15), "75.0000000000000");
        assert_eq!(decimal(&ratio(1, 3_000_000_000i64), 6), "3.33333e-10");
        assert_eq!(decimal(&ratio(999_999, 1_000_000), 3), "1.00");
        assert_eq!(decimal(&ratio(1, 1), 1), "1");
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), ratio(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn truncation_and_rounding() {
        let x = ratio(60787715824333487i64, 100000000000000000i64);
        assert_eq!(truncate_places(&x, 5), ratio(60787, 100000));
        assert_eq!(round_places(&x, 5), ratio(60788, 100000));
    }
}
