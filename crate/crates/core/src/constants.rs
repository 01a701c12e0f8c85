//! Certified enclosures of π, ζ(k), logarithms and Euler products.
//!
//! Series are summed in fixed point at `bits` fractional bits with an
//! explicit ulp error budget; the returned intervals are exact dyadic
//! rationals guaranteed to contain the true value.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::interval::{RigorousInterval, DEFAULT_BITS};

fn from_fixed(center: &BigInt, err: u64, bits: u32) -> RigorousInterval {
    let scale = BigInt::one() << bits;
    RigorousInterval::new(
        BigRational::new(center - err, scale.clone()),
        BigRational::new(center + err, scale),
    )
}

/// Σ_{n≥0} (±1)^n t^{2n+1}/(2n+1) for t = a/b with 0 ≤ a/b ≤ 1/3, in fixed
/// point. Returns (value·2^bits, error bound in ulps).
fn odd_series(a: &BigInt, b: &BigInt, bits: u32, alternating: bool) -> (BigInt, u64) {
    assert!(!a.is_negative() && b.is_positive() && a * 3 <= *b);
    let a2 = a * a;
    let b2 = b * b;
    let mut pw = (a << bits).div_floor(b);
    let mut sum = BigInt::zero();
    let mut n: u64 = 0;
    while !pw.is_zero() {
        let term = &pw / (2 * n + 1);
        if alternating && n % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        pw = (pw * &a2).div_floor(&b2);
        n += 1;
    }
    // Each power is at most ~1.2 ulp low, each term another ulp; the tail is
    // below 2 ulps because the remaining powers are < 1.2 and shrink by t² ≤ 1/9.
    (sum, 2 * n + 3)
}

fn atan_inv(x: u64, bits: u32) -> (BigInt, u64) {
    odd_series(&BigInt::one(), &BigInt::from(x), bits, true)
}

/// π by Machin's formula 16·atan(1/5) − 4·atan(1/239).
pub fn pi(bits: u32) -> RigorousInterval {
    let b = bits + 8;
    let (a5, e5) = atan_inv(5, b);
    let (a239, e239) = atan_inv(239, b);
    let center = a5 * 16 - a239 * 4;
    from_fixed(&center, 16 * e5 + 4 * e239, b).round_out(bits)
}

fn ln2_fixed(bits: u32) -> (BigInt, u64) {
    let (v, e) = odd_series(&BigInt::one(), &BigInt::from(3), bits, false);
    (v * 2, 2 * e)
}

pub fn ln2(bits: u32) -> RigorousInterval {
    let b = bits + 8;
    let (v, e) = ln2_fixed(b);
    from_fixed(&v, e, b).round_out(bits)
}

/// ln q for a positive rational q.
pub fn ln(q: &BigRational, bits: u32) -> RigorousInterval {
    assert!(q.is_positive(), "logarithm of a non-positive number");
    let b = bits + 16;
    // q = 2^m · y with y in [2/3, 4/3], so |(y−1)/(y+1)| ≤ 1/5.
    let mut m = q.numer().bits() as i64 - q.denom().bits() as i64;
    let two = BigRational::from_integer(2.into());
    let pow2 = |m: i64| {
        if m >= 0 {
            BigRational::from_integer(BigInt::one() << m as u32)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-m) as u32)
        }
    };
    let mut y = q / pow2(m);
    let four_thirds = BigRational::new(4.into(), 3.into());
    let two_thirds = BigRational::new(2.into(), 3.into());
    while y > four_thirds {
        y /= &two;
        m += 1;
    }
    while y < two_thirds {
        y *= &two;
        m -= 1;
    }
    let t = (&y - BigRational::one()) / (&y + BigRational::one());
    let (s, es) = odd_series(&t.numer().abs(), t.denom(), b, false);
    let s = if t.is_negative() { -s } else { s };
    let (l2, e2) = ln2_fixed(b);
    let center = s * 2 + l2 * m;
    let err = 2 * es + e2 * m.unsigned_abs() + 1;
    from_fixed(&center, err, b).round_out(bits)
}

pub fn ln_u64(n: u64, bits: u32) -> RigorousInterval {
    ln(&BigRational::from_integer(n.into()), bits)
}

/// Bernoulli numbers B_0..=B_n (B_1 = +1/2) by the Akiyama–Tanigawa recurrence.
pub fn bernoulli(n: usize) -> Vec<BigRational> {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigRational::from_integer(BigInt::from(j));
        }
        out.push(a[0].clone());
    }
    out
}

const EM_CUT: u64 = 64;
const EM_TERMS: usize = 32;

fn bernoulli_table() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| bernoulli(2 * EM_TERMS + 2))
}

/// ζ(k) for integer k ≥ 2 by Euler–Maclaurin summation with cut N = 64.
///
/// For real arguments the remainder after the B_{2J} term is bounded by the
/// first omitted term; twice that is used.
pub fn zeta(k: u32, bits: u32) -> RigorousInterval {
    assert!(k >= 2, "zeta needs k >= 2");
    let n = BigInt::from(EM_CUT);
    let kk = BigInt::from(k);
    let mut head = BigRational::zero();
    for m in 1..EM_CUT {
        head += BigRational::new(BigInt::one(), BigInt::from(m).pow(k));
    }
    // ∫_N^∞ x^{-k} dx + N^{-k}/2
    head += BigRational::new(BigInt::one(), (&kk - 1u32) * n.pow(k - 1));
    head += BigRational::new(BigInt::one(), n.pow(k) * 2u32);
    let bern = bernoulli_table();
    // term_j = B_{2j}/(2j)! · k(k+1)…(k+2j−2) · N^{−k−2j+1}
    let term = |j: usize| -> BigRational {
        let mut rising = BigInt::one();
        for i in 0..(2 * j - 1) {
            rising *= &kk + i;
        }
        let mut fact = BigInt::one();
        for i in 1..=(2 * j) {
            fact *= i;
        }
        &bern[2 * j] * BigRational::new(rising, fact * n.pow(k + 2 * j as u32 - 1))
    };
    for j in 1..=EM_TERMS {
        head += term(j);
    }
    let err = term(EM_TERMS + 1).abs() * BigRational::from_integer(2.into());
    RigorousInterval::point(head).widen(&err).round_out(bits)
}

/// Cached ζ(k) at the default precision.
pub fn zeta_cached(k: u32) -> RigorousInterval {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<u32, RigorousInterval>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("zeta cache").get(&k) {
        return v.clone();
    }
    let v = zeta(k, DEFAULT_BITS);
    cache.lock().expect("zeta cache").insert(k, v.clone());
    v
}

/// 1/ζ(k) at the default precision.
pub fn inv_zeta(k: u32) -> RigorousInterval {
    zeta_cached(k).recip().round_out(DEFAULT_BITS)
}

/// ζ(s) for real s > 1 in double precision (Euler–Maclaurin, N = 16).
/// Absolute error is below 1e-14 for s ≥ 1.05.
pub fn zeta_f64(s: f64) -> f64 {
    assert!(s > 1.0);
    let n = 16.0f64;
    let mut sum: f64 = (1..16).map(|m| (m as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // B2/2!, B4/4!, B6/6!, B8/8!
    let coef = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let mut rising = s;
    let mut p = n.powf(-s - 1.0);
    for (j, c) in coef.iter().enumerate() {
        sum += c * rising * p;
        rising *= (s + 2.0 * j as f64 + 1.0) * (s + 2.0 * j as f64 + 2.0);
        p /= n * n;
    }
    sum
}

/// Fixed-point product of exact factors num/den ∈ (0, 1], rounded outward
/// at every step.
pub struct FixedProduct {
    bits: u32,
    lo: BigInt,
    hi: BigInt,
}

impl FixedProduct {
    pub fn new(bits: u32) -> Self {
        let one = BigInt::one() << bits;
        FixedProduct {
            bits,
            lo: one.clone(),
            hi: one,
        }
    }

    pub fn mul_ratio(&mut self, num: &BigInt, den: &BigInt) {
        debug_assert!(!num.is_negative() && den.is_positive());
        self.lo = (&self.lo * num).div_floor(den);
        self.hi = (&self.hi * num).div_ceil(den);
    }

    pub fn mul_u128(&mut self, num: u128, den: u128) {
        self.mul_ratio(&BigInt::from(num), &BigInt::from(den));
    }

    pub fn finish(&self) -> RigorousInterval {
        let scale = BigInt::one() << self.bits;
        RigorousInterval::new(
            BigRational::new(self.lo.clone(), scale.clone()),
            BigRational::new(self.hi.clone(), scale),
        )
    }
}

/// Π_{p ≤ P}(1 − p^{−k}) over the given primes.
pub fn euler_partial(primes: &[u64], k: u32, bits: u32) -> RigorousInterval {
    let mut prod = FixedProduct::new(bits + 16);
    for &p in primes {
        let pk = BigInt::from(p).pow(k);
        prod.mul_ratio(&(&pk - 1u32), &pk);
    }
    prod.finish().round_out(bits)
}

/// Upper bound Σ_{n>P} n^{−k} ≤ 1/((k−1)P^{k−1}).
pub fn power_tail_bound(p: u64, k: u32) -> BigRational {
    assert!(k >= 2 && p >= 1);
    BigRational::new(BigInt::one(), BigInt::from(k - 1) * BigInt::from(p).pow(k - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn tiny() -> BigRational {
        ratio(1, 10).pow(30)
    }

    #[test]
    fn pi_digits_and_width() {
        let p = pi(DEFAULT_BITS);
        assert!(p.width() < tiny());
        // 3.14159265358979323846264338327950288
        let lo = ratio(
            314159265358979323846264338327950i128,
            100000000000000000000000000000000i128,
        );
        let hi = &lo + ratio(1, 10).pow(32);
        assert!(RigorousInterval::new(lo, hi).contains_interval(&p));
    }

    #[test]
    fn zeta_two_matches_pi_squared_over_six() {
        let z2 = zeta(2, DEFAULT_BITS);
        let p = pi(DEFAULT_BITS);
        let via_pi = (&p * &p).scale(&ratio(1, 6));
        assert!(z2.overlaps(&via_pi));
        assert!(z2.width() < tiny());
    }

    #[test]
    fn zeta_three_and_four_digits() {
        // ζ(3) = 1.202056903159594285399738161511449990765
        let z3 = zeta(3, DEFAULT_BITS);
        let c = ratio(
            1202056903159594285399738161511449990i128,
            1000000000000000000000000000000000000i128,
        );
        assert!(z3.widen(&ratio(1, 10).pow(35)).contains(&c));
        assert!(z3.width() < tiny());
        let z4 = zeta(4, DEFAULT_BITS);
        let p = pi(DEFAULT_BITS);
        assert!(z4.overlaps(&p.powi(4).scale(&ratio(1, 90))));
    }

    #[test]
    fn ln_values() {
        // ln 2 = 0.693147180559945309417232121458176568
        let l2 = ln2(DEFAULT_BITS);
        let c = ratio(
            693147180559945309417232121458176568i128,
            1000000000000000000000000000000000000i128,
        );
        assert!(l2.widen(&ratio(1, 10).pow(35)).contains(&c));
        assert!(l2.width() < tiny());
        let l10 = ln_u64(10, DEFAULT_BITS);
        assert!((l10.mid_f64() - std::f64::consts::LN_10).abs() < 1e-15);
        assert!(l10.width() < tiny());
        let lq = ln(&ratio(3, 7), DEFAULT_BITS);
        assert!((lq.mid_f64() - (3.0f64 / 7.0).ln()).abs() < 1e-15);
        assert!(ln_u64(1, DEFAULT_BITS).contains(&BigRational::zero()));
        // ln(ab) = ln a + ln b
        let a = ln_u64(820, DEFAULT_BITS);
        let b = ln_u64(1276, DEFAULT_BITS);
        assert!((&a + &b).overlaps(&ln_u64(820 * 1276, DEFAULT_BITS)));
    }

    #[test]
    fn bernoulli_small() {
        let b = bernoulli(8);
        assert_eq!(b[0], ratio(1, 1));
        assert_eq!(b[1], ratio(1, 2));
        assert_eq!(b[2], ratio(1, 6));
        assert_eq!(b[3], ratio(0, 1));
        assert_eq!(b[4], ratio(-1, 30));
        assert_eq!(b[8], ratio(-1, 30));
    }

    #[test]
    fn zeta_f64_close_to_certified() {
        for k in 2..8 {
            assert!((zeta_f64(k as f64) - zeta(k, 64).mid_f64()).abs() < 1e-14);
        }
        assert!((zeta_f64(1.5) - 2.612375348685488).abs() < 1e-13);
    }

    #[test]
    fn euler_product_brackets_inverse_zeta() {
        let primes = [2u64, 3, 5, 7, 11, 13];
        let part = euler_partial(&primes, 2, 128);
        let inv = inv_zeta(2);
        assert!(part.lo() > inv.hi());
        let crude = part.lo() * (BigRational::one() - power_tail_bound(13, 2));
        assert!(&crude < inv.lo());
    }
}
