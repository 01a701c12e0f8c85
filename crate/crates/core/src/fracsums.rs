//! Fractional-part Möbius sums
//!
//! M(L) = Σ_{d≤L} μ(d){L/d}/d^{k−1}, its infinite counterpart m(L) and
//! h_k(L) = Σ_d μ(d)(1/2 − {L/d})/d^{k−1}, together with the exact-count
//! remainder R(L) = |V_k ∩ [1,L]^k| − L^k/ζ(k) + k·M(L)·L^{k−1}.
//!
//! Sums are accumulated in fixed point with each term rounded outward, so the
//! result is an enclosure whose width is at most (number of terms)·2^{−bits}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::constants::inv_zeta;
use crate::error::{Error, Result};
use crate::interval::{RigorousInterval, DEFAULT_BITS};
use crate::ntcore::{build_prime_tables_with, jordan_prefix_sums_with, PrimeTables};
use crate::visibility::count_visible_cubes_origin_with;

/// Fractional bits of the fixed-point accumulators.
const FRAC_BITS: u32 = 100;

#[derive(Clone, Debug, Serialize)]
pub struct FracSumValue {
    pub l: u64,
    pub k: u32,
    pub value: RigorousInterval,
    /// Last index summed exactly; the rest is covered by a tail bound.
    pub truncation: u64,
    /// Set for k = 2, where the asymptotic statements do not apply.
    pub diagnostic: bool,
}

/// Fixed-point enclosure [lo, hi]·2^{−bits}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Fixed {
    lo: i128,
    hi: i128,
}

impl Fixed {
    fn add(self, o: Fixed) -> Fixed {
        Fixed {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
    }

    fn neg(self) -> Fixed {
        Fixed {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    fn to_interval(self, bits: u32) -> RigorousInterval {
        let scale = BigInt::one() << bits;
        RigorousInterval::new(
            BigRational::new(BigInt::from(self.lo), scale.clone()),
            BigRational::new(BigInt::from(self.hi), scale),
        )
    }
}

/// Outward enclosure of sign·num/d^e at scale 2^bits. Needs num < 2^(127−bits).
/// Repeated floor (ceil) division equals one floor (ceil) division by d^e.
fn term(num: u128, d: u64, e: u32, bits: u32, negative: bool) -> Fixed {
    let mut lo = num << bits;
    let mut hi = lo;
    for _ in 0..e {
        lo /= d as u128;
        hi = hi.div_ceil(d as u128);
    }
    let t = Fixed {
        lo: lo as i128,
        hi: hi as i128,
    };
    if negative {
        t.neg()
    } else {
        t
    }
}

fn bits_for(max_num: u64) -> u32 {
    let used = 64 - max_num.leading_zeros();
    FRAC_BITS.min(126 - used)
}

fn check_k(k: u32, min: u32) -> Result<()> {
    if k < min {
        return Err(Error::InvalidInput(format!("dimension k must be >= {min}, got {k}")));
    }
    Ok(())
}

/// Σ_{d≤upto} μ(d)·f(d) where f(d) = (sign, num)/d^k.
fn mobius_sum(tables: &PrimeTables, upto: u64, k: u32, bits: u32, f: impl Fn(u64) -> (bool, u128) + Sync) -> Fixed {
    const CHUNK: u64 = 1 << 14;
    let chunks = upto.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Fixed::default();
            for d in (c * CHUNK + 1)..=((c + 1) * CHUNK).min(upto) {
                let mu = tables.mu(d);
                if mu == 0 {
                    continue;
                }
                let (neg, num) = f(d);
                if num == 0 {
                    continue;
                }
                acc = acc.add(term(num, d, k, bits, neg != (mu < 0)));
            }
            acc
        })
        .reduce(Fixed::default, Fixed::add)
}

fn tables_for(n: u64, budget: &Budget) -> Result<PrimeTables> {
    build_prime_tables_with(n.max(2), budget)
}

pub fn m_partial(l: u64, k: u32) -> Result<FracSumValue> {
    m_partial_with(l, k, &Budget::default())
}

/// M(L) = Σ_{d≤L} μ(d)(L mod d)/d^k.
pub fn m_partial_with(l: u64, k: u32, budget: &Budget) -> Result<FracSumValue> {
    check_k(k, 2)?;
    if l == 0 {
        return Err(Error::InvalidInput("L must be positive".into()));
    }
    let tables = tables_for(l, budget)?;
    let bits = bits_for(l);
    let sum = mobius_sum(&tables, l, k, bits, |d| (false, (l % d) as u128));
    Ok(FracSumValue {
        l,
        k,
        value: sum.to_interval(bits),
        truncation: l,
        diagnostic: k < 3,
    })
}

/// Bound on Σ_{d>P} |μ(d)|{L/d}/d^{k−1}: the smaller of Σ_{d>P} d^{1−k} and,
/// since {L/d} = L/d for d > L, L·Σ_{d>P} d^{−k}.
fn tail_bound(l: u64, k: u32, p: u64) -> BigRational {
    let pq = BigRational::from_integer(p.into());
    let crude = (BigRational::from_integer(BigInt::from(k - 2)) * pq.pow(k as i32 - 2)).recip();
    let sharp =
        BigRational::from_integer(l.into()) / (BigRational::from_integer(BigInt::from(k - 1)) * pq.pow(k as i32 - 1));
    crude.min(sharp)
}

pub fn m_infinite(l: u64, k: u32, p: u64) -> Result<FracSumValue> {
    m_infinite_with(l, k, p, &Budget::default())
}

/// m(L) = Σ_{d≥1} μ(d){L/d}/d^{k−1}, summed to P and widened by the tail.
pub fn m_infinite_with(l: u64, k: u32, p: u64, budget: &Budget) -> Result<FracSumValue> {
    check_k(k, 3)?;
    if l == 0 || p < l {
        return Err(Error::InvalidInput(format!("need 1 <= L <= P, got L = {l}, P = {p}")));
    }
    let tables = tables_for(p, budget)?;
    let bits = bits_for(p);
    let sum = mobius_sum(&tables, p, k, bits, |d| (false, (l % d) as u128));
    Ok(FracSumValue {
        l,
        k,
        value: sum.to_interval(bits).widen(&tail_bound(l, k, p)),
        truncation: p,
        diagnostic: false,
    })
}

pub fn h_k(l: u64, k: u32, p: u64) -> Result<FracSumValue> {
    h_k_with(l, k, p, &Budget::default())
}

/// h_k(L) = Σ_{d≥1} μ(d)(1/2 − {L/d})/d^{k−1}, summed term by term to P.
pub fn h_k_with(l: u64, k: u32, p: u64, budget: &Budget) -> Result<FracSumValue> {
    check_k(k, 3)?;
    if l == 0 || p < l {
        return Err(Error::InvalidInput(format!("need 1 <= L <= P, got L = {l}, P = {p}")));
    }
    let tables = tables_for(p, budget)?;
    // terms are (d − 2(L mod d))/(2d^k); the factor 1/2 is applied at the end
    let bits = bits_for(p);
    let sum = mobius_sum(&tables, p, k, bits, |d| {
        let r = 2 * (l % d) as i128 - d as i128;
        (r > 0, r.unsigned_abs())
    });
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    // |1/2 − {L/d}| ≤ 1/2 for every d
    let pq = BigRational::from_integer(p.into());
    let tail = (BigRational::from_integer(BigInt::from(2 * (k - 2))) * pq.pow(k as i32 - 2)).recip();
    Ok(FracSumValue {
        l,
        k,
        value: sum.to_interval(bits).scale(&half).widen(&tail),
        truncation: p,
        diagnostic: false,
    })
}

/// M(L) for every L in 1..=n via M(L) = M(L−1) + Σ_{d<L} μ(d)/d^k
/// − Σ_{d | L, d<L} μ(d)/d^{k−1}. Index 0 holds M(0) = 0.
fn m_sequence(tables: &PrimeTables, k: u32, n: u64) -> Vec<Fixed> {
    let bits = FRAC_BITS;
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Fixed::default());
    let mut m = Fixed::default();
    // Σ_{d<L} μ(d)/d^k
    let mut s = Fixed::default();
    for l in 1..=n {
        let mut div = Fixed::default();
        for (d, mu_d) in tables.squarefree_divisors(l) {
            if d < l {
                div = div.add(term(1, d, k - 1, bits, mu_d < 0));
            }
        }
        m = m.add(s).add(div.neg());
        out.push(m);
        let mu = tables.mu(l);
        if mu != 0 {
            s = s.add(term(1, l, k, bits, mu < 0));
        }
    }
    out
}

pub fn m_values(k: u32, n: u64) -> Result<Vec<RigorousInterval>> {
    m_values_with(k, n, &Budget::default())
}

/// Enclosures of M(1), …, M(n), at index L.
pub fn m_values_with(k: u32, n: u64, budget: &Budget) -> Result<Vec<RigorousInterval>> {
    check_k(k, 2)?;
    budget.check_bytes("M(L) table", (n as u128 + 1) * 32)?;
    let tables = tables_for(n, budget)?;
    Ok(m_sequence(&tables, k, n)
        .into_iter()
        .map(|f| f.to_interval(FRAC_BITS))
        .collect())
}

/// First L with a certified sign of M(L) in each region.
#[derive(Clone, Debug, Serialize)]
pub struct SignWitnesses {
    pub k: u32,
    pub n: u64,
    pub first_negative: Option<u64>,
    pub first_positive: Option<u64>,
    /// 1/ζ(k−1) − 1/ζ(k)
    pub gap: RigorousInterval,
    pub first_below_gap: Option<u64>,
    pub min_l: u64,
    pub min_value: f64,
    pub max_l: u64,
    pub max_value: f64,
}

pub fn sign_witnesses(k: u32, n: u64) -> Result<SignWitnesses> {
    sign_witnesses_with(k, n, &Budget::default())
}

pub fn sign_witnesses_with(k: u32, n: u64, budget: &Budget) -> Result<SignWitnesses> {
    check_k(k, 3)?;
    if n == 0 {
        return Err(Error::InvalidInput("scan limit must be positive".into()));
    }
    if n > budget.max_scan {
        return Err(Error::capacity("scan limit", n as u128, budget.max_scan as u128));
    }
    budget.check_bytes("M(L) table", (n as u128 + 1) * 32)?;
    let tables = tables_for(n, budget)?;
    let seq = m_sequence(&tables, k, n);
    let gap = (&inv_zeta(k - 1) - &inv_zeta(k)).round_out(DEFAULT_BITS);
    // gap.hi at the accumulator scale, rounded down so `hi < gap_fixed` is sound
    let scale = BigRational::from_integer(BigInt::one() << FRAC_BITS);
    let gap_fixed = (gap.lo() * &scale).floor().to_integer().to_i128().expect("gap fits");
    let mid = |f: &Fixed| (f.lo as f64 + f.hi as f64) / 2.0 / 2f64.powi(FRAC_BITS as i32);
    let mut w = SignWitnesses {
        k,
        n,
        first_negative: None,
        first_positive: None,
        gap,
        first_below_gap: None,
        min_l: 1,
        min_value: 0.0,
        max_l: 1,
        max_value: 0.0,
    };
    for (l, f) in seq.iter().enumerate().skip(1) {
        let l = l as u64;
        if f.hi < 0 && w.first_negative.is_none() {
            w.first_negative = Some(l);
        }
        if f.lo > 0 && w.first_positive.is_none() {
            w.first_positive = Some(l);
        }
        if f.hi < gap_fixed && w.first_below_gap.is_none() {
            w.first_below_gap = Some(l);
        }
        let v = mid(f);
        if v < w.min_value {
            (w.min_l, w.min_value) = (l, v);
        }
        if v > w.max_value {
            (w.max_l, w.max_value) = (l, v);
        }
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct CountIdentityReport {
    pub k: u32,
    pub n: u64,
    /// R(1) = 1 − 1/ζ(k)
    pub remainder_at_1: RigorousInterval,
    /// Upper bound on max_{2≤L≤N} |R(L)| / (L^{k−2} log L).
    pub max_normalized: f64,
    pub argmax: u64,
}

pub fn verify_count_identity(k: u32, n: u64) -> Result<CountIdentityReport> {
    verify_count_identity_with(k, n, &Budget::default())
}

/// R(L) = |V_k ∩ [1,L]^k| − L^k/ζ(k) + k·M(L)·L^{k−1} for L ≤ N.
pub fn verify_count_identity_with(k: u32, n: u64, budget: &Budget) -> Result<CountIdentityReport> {
    check_k(k, 3)?;
    if n == 0 {
        return Err(Error::InvalidInput("limit must be positive".into()));
    }
    let counts = count_visible_cubes_origin_with(k, n, budget)?;
    let ms = m_values_with(k, n, budget)?;
    let iz = inv_zeta(k);
    let remainder = |l: u64| -> RigorousInterval {
        let lq = BigRational::from_integer(l.into());
        let main = iz.scale(&lq.pow(k as i32));
        let corr = ms[l as usize].scale(&(BigRational::from_integer(k.into()) * lq.pow(k as i32 - 1)));
        let count = RigorousInterval::point(BigRational::from_integer(BigInt::from(counts[l as usize])));
        &(&count - &main) + &corr
    };
    let remainder_at_1 = remainder(1).round_out(DEFAULT_BITS);
    let (argmax, max_normalized) = (2..=n)
        .into_par_iter()
        .map(|l| {
            let r = remainder(l);
            let abs = r.lo().abs().max(r.hi().abs());
            let norm = (l as f64).powi(k as i32 - 2) * (l as f64).ln();
            (l, abs.to_f64().unwrap_or(f64::INFINITY) / norm)
        })
        .reduce(
            || (0, 0.0),
            |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    Ok(CountIdentityReport {
        k,
        n,
        remainder_at_1,
        max_normalized,
        argmax,
    })
}

/// E_k(L) = k·Σ_{m≤L} J_{k−1}(m) − L^k/ζ(k).
pub fn jordan_sum_error(k: u32, l: u64, budget: &Budget) -> Result<RigorousInterval> {
    check_k(k, 2)?;
    let t = jordan_prefix_sums_with(k, l, budget)?;
    let sum = BigRational::from_integer(BigInt::from(t.prefix(k - 1, l)) * BigInt::from(k));
    let main = inv_zeta(k).scale(&BigRational::from_integer(BigInt::from(l).pow(k)));
    Ok((&RigorousInterval::point(sum) - &main).round_out(DEFAULT_BITS))
}

/// Σ_{d≤L} d^{1−k}, the trivial bound on |M(L)|.
pub fn m_crude_bound(l: u64, k: u32) -> BigRational {
    let mut acc = BigRational::zero();
    for d in 1..=l {
        acc += BigRational::new(BigInt::one(), BigInt::from(d).pow(k - 1));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::zeta_cached;
    use crate::rational::ratio;
    use rand::{Rng, SeedableRng};

    fn exact_m(l: u64, k: u32) -> BigRational {
        let mut acc = BigRational::zero();
        for d in 1..=l {
            let mu = crate::ntcore::mobius_of(d);
            acc += ratio(mu as i64 * (l % d) as i64, 1) / BigRational::from_integer(BigInt::from(d).pow(k));
        }
        acc
    }

    #[test]
    fn small_values() {
        assert!(m_partial(1, 3).unwrap().value.contains(&BigRational::zero()));
        assert!(m_partial(2, 3).unwrap().value.contains(&BigRational::zero()));
        let v = m_partial(3, 3).unwrap();
        assert!(v.value.contains(&ratio(-1, 8)));
        assert!(v.value.width() < ratio(1, 100_000_000_000_000_000_000i128));
        assert!(m_partial(5, 2).unwrap().diagnostic);
    }

    #[test]
    fn fixed_point_matches_exact_rationals() {
        for k in [2, 3, 4] {
            for l in [7u64, 30, 97, 210] {
                let v = m_partial(l, k).unwrap();
                assert!(v.value.contains(&exact_m(l, k)), "k = {k}, L = {l}");
                assert!(v.value.width() < ratio(1, 100_000_000_000_000_000_000i128));
                let crude = m_crude_bound(l, k);
                assert!(v.value.hi() <= &crude && -v.value.lo() <= crude);
            }
        }
    }

    #[test]
    fn sequence_agrees_with_direct_sums() {
        let seq = m_values(3, 500).unwrap();
        for l in [1u64, 3, 64, 211, 500] {
            assert!(seq[l as usize].contains(&exact_m(l, 3)), "L = {l}");
        }
        assert!(seq[3].contains(&ratio(-1, 8)));
    }

    #[test]
    fn infinite_sum_contains_partial_sum_window() {
        for l in [1u64, 10, 100] {
            let mm = m_partial(l, 3).unwrap().value;
            let big = m_infinite(l, 3, 100_000).unwrap().value;
            let tail = m_crude_tail(l, 3);
            assert!(mm.widen(&tail).overlaps(&big), "L = {l}");
        }
        let w = m_infinite(100, 3, 1_000_000).unwrap().value.width();
        assert!(w <= ratio(1, 1_000_000));
    }

    fn m_crude_tail(l: u64, k: u32) -> BigRational {
        // Σ_{d>L} d^{1−k} ≤ 1/((k−2)L^{k−2})
        BigRational::new(BigInt::one(), BigInt::from(k - 2) * BigInt::from(l).pow(k - 2))
    }

    #[test]
    fn h_plus_m_is_half_inverse_zeta() {
        let target = zeta_cached(2).recip().scale(&ratio(1, 2));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let l = rng.gen_range(1..=10_000u64);
            let h = h_k(l, 3, 20_000).unwrap().value;
            let m = m_infinite(l, 3, 20_000).unwrap().value;
            assert!((&h + &m).overlaps(&target), "L = {l}");
        }
        let h4 = h_k(10, 4, 1000).unwrap().value;
        assert!(h4.width() <= ratio(2, 2 * 1000 * 1000));
    }

    #[test]
    fn count_identity() {
        let r = verify_count_identity(3, 2000).unwrap();
        let expected = &RigorousInterval::one() - &inv_zeta(3);
        assert!(r.remainder_at_1.overlaps(&expected));
        // regression baseline
        assert!((r.max_normalized - 0.486_999_479_491).abs() < 1e-9, "{r:?}");
        assert_eq!(r.argmax, 5);
    }

    #[test]
    fn jordan_error_sign() {
        // E_2(L) changes sign; L = 1 gives 2 − 1/ζ(2) > 0
        assert!(jordan_sum_error(2, 1, &Budget::default()).unwrap().is_positive());
    }

    #[test]
    fn witnesses() {
        let w = sign_witnesses(3, 2000).unwrap();
        assert_eq!(w.first_negative, Some(3));
        assert!(w.min_value < 0.0);
    }
}
