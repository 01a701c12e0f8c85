//! Closed intervals with exact rational endpoints.
//!
//! Every comparison against an infinite product or series goes through a
//! [`RigorousInterval`]. Arithmetic is exact; [`RigorousInterval::round_out`]
//! trades width for size by snapping endpoints outward to a dyadic grid.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{decimal, parse_rational, rational_string};

/// Default dyadic precision, in bits, for rounded enclosures.
pub const DEFAULT_BITS: u32 = 192;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RigorousInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RigorousInterval {
    /// Panics if `lo > hi`.
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RigorousInterval { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        RigorousInterval { lo: q.clone(), hi: q }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::point(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::point(BigRational::one())
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_interval(&self, other: &RigorousInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &RigorousInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Where `q` sits relative to the interval: `Less` if every point is
    /// below `q`, `Greater` if every point is above it, `Equal` for the
    /// degenerate interval `[q, q]`, `None` if `q` lies inside a proper
    /// interval.
    pub fn compare(&self, q: &BigRational) -> Option<Ordering> {
        if &self.hi < q {
            Some(Ordering::Less)
        } else if &self.lo > q {
            Some(Ordering::Greater)
        } else if self.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn recip(&self) -> Self {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing zero"
        );
        RigorousInterval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }

    pub fn div(&self, other: &RigorousInterval) -> Self {
        self * &other.recip()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let a = &self.lo * q;
        let b = &self.hi * q;
        if q.is_negative() {
            RigorousInterval { lo: b, hi: a }
        } else {
            RigorousInterval { lo: a, hi: b }
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = RigorousInterval::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn hull(&self, other: &RigorousInterval) -> Self {
        RigorousInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Snaps `lo` down and `hi` up to multiples of 2^-bits.
    pub fn round_out(&self, bits: u32) -> Self {
        RigorousInterval {
            lo: dyadic_floor(&self.lo, bits),
            hi: dyadic_ceil(&self.hi, bits),
        }
    }

    /// Widens by `eps` on both sides.
    pub fn widen(&self, eps: &BigRational) -> Self {
        RigorousInterval {
            lo: &self.lo - eps,
            hi: &self.hi + eps,
        }
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn dyadic_floor(q: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let n = (q.numer() * &scale).div_floor(q.denom());
    BigRational::new(n, scale)
}

pub fn dyadic_ceil(q: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let n = (q.numer() * &scale).div_ceil(q.denom());
    BigRational::new(n, scale)
}

impl Add for &RigorousInterval {
    type Output = RigorousInterval;
    fn add(self, rhs: &RigorousInterval) -> RigorousInterval {
        RigorousInterval {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &RigorousInterval {
    type Output = RigorousInterval;
    fn sub(self, rhs: &RigorousInterval) -> RigorousInterval {
        RigorousInterval {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul for &RigorousInterval {
    type Output = RigorousInterval;
    fn mul(self, rhs: &RigorousInterval) -> RigorousInterval {
        if !self.lo.is_negative() && !rhs.lo.is_negative() {
            return RigorousInterval {
                lo: &self.lo * &rhs.lo,
                hi: &self.hi * &rhs.hi,
            };
        }
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().cloned().expect("four candidates");
        let hi = c.iter().max().cloned().expect("four candidates");
        RigorousInterval { lo, hi }
    }
}

impl Neg for &RigorousInterval {
    type Output = RigorousInterval;
    fn neg(self) -> RigorousInterval {
        RigorousInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RigorousInterval {
            type Output = RigorousInterval;
            fn $m(self, rhs: RigorousInterval) -> RigorousInterval {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for RigorousInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", decimal(&self.lo, 15), decimal(&self.hi, 15))
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: String,
    hi: String,
    #[serde(default, skip_deserializing)]
    lo_decimal: String,
    #[serde(default, skip_deserializing)]
    hi_decimal: String,
}

impl Serialize for RigorousInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalRepr {
            lo: rational_string(&self.lo),
            hi: rational_string(&self.hi),
            lo_decimal: decimal(&self.lo, 15),
            hi_decimal: decimal(&self.hi, 15),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigorousInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = IntervalRepr::deserialize(d)?;
        let lo = parse_rational(&r.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rational(&r.hi).map_err(serde::de::Error::custom)?;
        if lo > hi {
            return Err(serde::de::Error::custom("interval endpoints out of order"));
        }
        Ok(RigorousInterval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn iv(a: (i64, i64), b: (i64, i64)) -> RigorousInterval {
        RigorousInterval::new(q(a.0, a.1), q(b.0, b.1))
    }

    #[test]
    fn compare_three_ways() {
        let x = iv((1, 3), (1, 2));
        assert_eq!(x.compare(&q(1, 1)), Some(Ordering::Less));
        assert_eq!(x.compare(&q(1, 4)), Some(Ordering::Greater));
        assert_eq!(x.compare(&q(2, 5)), None);
        assert_eq!(
            RigorousInterval::point(q(2, 5)).compare(&q(2, 5)),
            Some(Ordering::Equal)
        );
    }

    #[test]
    fn round_out_contains_original() {
        let x = iv((1, 3), (2, 3));
        let r = x.round_out(20);
        assert!(r.contains_interval(&x));
        assert!(r.width() - x.width() <= q(2, 1 << 20));
    }

    #[test]
    fn serde_round_trip() {
        let x = iv((-7, 3), (5, 11));
        let s = serde_json::to_string(&x).unwrap();
        assert!(s.contains("\"-7/3\""));
        let y: RigorousInterval = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    fn arb_interval() -> impl Strategy<Value = RigorousInterval> {
        (-50i64..50, 1i64..20, 0i64..50, 1i64..20).prop_map(|(a, b, w, c)| {
            let lo = q(a, b);
            let hi = &lo + q(w, c);
            RigorousInterval::new(lo, hi)
        })
    }

    proptest! {
        #[test]
        fn arithmetic_encloses_pointwise_results(x in arb_interval(), y in arb_interval(), t in 0u32..=8, u in 0u32..=8) {
            let pick = |i: &RigorousInterval, t: u32| {
                i.lo() + (i.hi() - i.lo()) * q(t as i64, 8)
            };
            let a = pick(&x, t);
            let b = pick(&y, u);
            prop_assert!((&x + &y).contains(&(&a + &b)));
            prop_assert!((&x - &y).contains(&(&a - &b)));
            prop_assert!((&x * &y).contains(&(&a * &b)));
            prop_assert!((-&x).contains(&(-&a)));
            if y.is_positive() {
                prop_assert!(x.div(&y).contains(&(&a / &b)));
            }
        }
    }
}
