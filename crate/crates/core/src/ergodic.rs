//! Truncated points of the profinite group G^k = Π_p (Z/pZ)^k, the graded
//! visibility function Φ_s and its averages over boxes of shifts.
//!
//! A truncated point keeps residues for the first T primes. Φ_s of a true
//! point lies in Φ_s(truncation)·[Π_{i>T}(1 − pᵢ^{−s}), 1].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::constants::{euler_partial, inv_zeta};
use crate::error::{Error, Result};
use crate::interval::{RigorousInterval, DEFAULT_BITS};
use crate::ntcore::{build_prime_tables, count_in_progression_u128};
use crate::visibility::{mod_inverse, LatticeBox};

/// Beyond this many primes box averages enumerate the box instead of running
/// inclusion–exclusion over 2^T moduli.
const MAX_IE_PRIMES: usize = 25;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedPoint {
    k: usize,
    primes: Vec<u64>,
    /// `residues[i][j]` ∈ [0, primes[i])
    residues: Vec<Vec<u64>>,
}

fn first_primes(t: usize) -> Result<Vec<u64>> {
    let mut limit = 64u64;
    loop {
        let tables = build_prime_tables(limit)?;
        if tables.primes().len() >= t {
            return Ok(tables.primes()[..t].to_vec());
        }
        limit *= 2;
    }
}

impl TruncatedPoint {
    pub fn new(k: usize, residues: Vec<Vec<u64>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        let primes = first_primes(residues.len())?;
        for (p, r) in primes.iter().zip(&residues) {
            if r.len() != k || r.iter().any(|&c| c >= *p) {
                return Err(Error::InvalidInput(format!(
                    "residues mod {p} must be {k} values in [0, {p})"
                )));
            }
        }
        Ok(TruncatedPoint { k, primes, residues })
    }

    /// Image of an integer point, truncated at the first `t` primes.
    pub fn image(x: &[i64], t: usize) -> Result<Self> {
        let primes = first_primes(t)?;
        let residues = primes
            .iter()
            .map(|&p| x.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
            .collect();
        TruncatedPoint::new(x.len(), residues)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn residues(&self) -> &[Vec<u64>] {
        &self.residues
    }

    /// The point R^n x, translated by an integer vector.
    pub fn shifted(&self, n: &[i64]) -> TruncatedPoint {
        assert_eq!(n.len(), self.k);
        let residues = self
            .primes
            .iter()
            .zip(&self.residues)
            .map(|(&p, r)| {
                r.iter()
                    .zip(n)
                    .map(|(&a, &b)| (a as i128 + b as i128).rem_euclid(p as i128) as u64)
                    .collect()
            })
            .collect();
        TruncatedPoint {
            k: self.k,
            primes: self.primes.clone(),
            residues,
        }
    }

    fn zero_at(&self, i: usize) -> bool {
        self.residues[i].iter().all(|&c| c == 0)
    }
}

fn check_s(s: u32) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidInput("exponent s must be a positive integer".into()));
    }
    Ok(())
}

/// Enclosure of Π_{i>T}(1 − pᵢ^{−s}): (1/ζ(s))/Π_{i≤T}(1 − pᵢ^{−s}) for
/// s ≥ 2, and 0 for s = 1, where the product diverges.
pub fn tail_factor(primes: &[u64], s: u32) -> RigorousInterval {
    if s < 2 {
        return RigorousInterval::zero();
    }
    inv_zeta(s)
        .div(&euler_partial(primes, s, DEFAULT_BITS))
        .round_out(DEFAULT_BITS)
}

fn one_minus_pow(p: u64, s: u32) -> BigRational {
    BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(p).pow(s))
}

/// Scales a non-negative rational by an enclosure [t, 1].
fn times_tail(x: &BigRational, tail: &RigorousInterval) -> RigorousInterval {
    RigorousInterval::new(x * tail.lo(), x.clone()).round_out(DEFAULT_BITS)
}

/// Φ_s(x) = Π over primes where every coordinate is 0 of (1 − p^{−s}).
pub fn phi_s(x: &TruncatedPoint, s: u32) -> Result<RigorousInterval> {
    check_s(s)?;
    let tail = tail_factor(&x.primes, s);
    Ok(times_tail(&phi_truncated(x, s), &tail))
}

fn phi_truncated(x: &TruncatedPoint, s: u32) -> BigRational {
    (0..x.t())
        .filter(|&i| x.zero_at(i))
        .fold(BigRational::one(), |acc, i| acc * one_minus_pow(x.primes[i], s))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinaryValue {
    pub value: u8,
    /// Set when the value is 1: a longer truncation could still give 0.
    pub upper_truncation: bool,
}

/// f(x) = 0 if some retained prime sees every coordinate at 0, else 1.
pub fn binary_f(x: &TruncatedPoint) -> BinaryValue {
    let zero = (0..x.t()).any(|i| x.zero_at(i));
    BinaryValue {
        value: u8::from(!zero),
        upper_truncation: !zero,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageResult {
    #[serde(rename = "box")]
    pub shifts: String,
    pub t: usize,
    pub s: u32,
    /// Average of the truncated Φ_s, exact.
    #[serde(with = "crate::rational::serde_q")]
    pub truncated: BigRational,
    pub value: RigorousInterval,
    /// 1/ζ(s + k)
    pub limit: RigorousInterval,
}

/// Σ_{n∈B} Σ_{d | P_T} μ(d)·w(d)·[x + n ≡ 0 mod d] by inclusion–exclusion,
/// where the inner condition is solved coordinate-wise by CRT.
fn ie_sum(x: &TruncatedPoint, shifts: &LatticeBox, weight: &dyn Fn(u128) -> BigRational) -> BigRational {
    let k = x.k;
    // residue of n_j making x_j + n_j ≡ 0
    let targets: Vec<Vec<u64>> = x
        .primes
        .iter()
        .zip(&x.residues)
        .map(|(&p, r)| r.iter().map(|&c| (p - c) % p).collect())
        .collect();

    fn count(shifts: &LatticeBox, d: u128, r: &[u128]) -> u64 {
        let mut c = 1u64;
        for (j, &rj) in r.iter().enumerate() {
            c = c.saturating_mul(count_in_progression_u128(shifts.mins()[j], shifts.lens()[j], rj, d));
            if c == 0 {
                break;
            }
        }
        c
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        i: usize,
        d: u128,
        r: &mut Vec<u128>,
        add: bool,
        x: &TruncatedPoint,
        targets: &[Vec<u64>],
        shifts: &LatticeBox,
        weight: &dyn Fn(u128) -> BigRational,
        acc: &mut BigRational,
    ) {
        for next in i..x.t() {
            let p = x.primes[next];
            let inv = mod_inverse((d % p as u128) as u64, p) as u128;
            let saved = r.clone();
            for (j, rj) in r.iter_mut().enumerate() {
                let b = targets[next][j] as u128;
                let a = *rj % p as u128;
                let t = ((b + p as u128 - a) % p as u128) * inv % p as u128;
                *rj += d * t;
            }
            let nd = d * p as u128;
            let c = count(shifts, nd, r);
            if c > 0 {
                let term = weight(nd) * BigRational::from_integer(BigInt::from(c));
                if add {
                    *acc += term;
                } else {
                    *acc -= term;
                }
                walk(next + 1, nd, r, !add, x, targets, shifts, weight, acc);
            }
            *r = saved;
        }
    }

    let vol = shifts.volume();
    let mut acc = BigRational::from_integer(BigInt::from(vol));
    let mut r = vec![0u128; k];
    // d = p carries μ = −1
    walk(0, 1, &mut r, false, x, &targets, shifts, weight, &mut acc);
    acc
}

fn check_box(x: &TruncatedPoint, shifts: &LatticeBox, budget: &Budget) -> Result<()> {
    if shifts.k() != x.k {
        return Err(Error::InvalidInput(format!(
            "shift box has dimension {}, point has {}",
            shifts.k(),
            x.k
        )));
    }
    if x.t() > MAX_IE_PRIMES {
        let vol = shifts.volume_u128().unwrap_or(u128::MAX);
        if vol > budget.max_point_tests as u128 {
            return Err(Error::capacity(
                "shift box enumeration",
                vol,
                budget.max_point_tests as u128,
            ));
        }
    }
    Ok(())
}

/// Exact Σ over the box of `f(x + n)`, by inclusion–exclusion when T is small.
fn box_sum(
    x: &TruncatedPoint,
    shifts: &LatticeBox,
    weight: &dyn Fn(u128) -> BigRational,
    direct: &dyn Fn(&TruncatedPoint) -> BigRational,
) -> BigRational {
    if x.t() <= MAX_IE_PRIMES {
        return ie_sum(x, shifts, weight);
    }
    let mut acc = BigRational::zero();
    shifts.for_each_point(|n| acc += direct(&x.shifted(n)));
    acc
}

pub fn ergodic_average(x: &TruncatedPoint, s: u32, shifts: &LatticeBox) -> Result<AverageResult> {
    ergodic_average_with(x, s, shifts, &Budget::default())
}

/// (1/|B|) Σ_{n∈B} Φ_s(x + n), exact for the truncation, widened by the tail.
pub fn ergodic_average_with(x: &TruncatedPoint, s: u32, shifts: &LatticeBox, budget: &Budget) -> Result<AverageResult> {
    check_s(s)?;
    check_box(x, shifts, budget)?;
    let weight = |d: u128| BigRational::new(BigInt::one(), BigInt::from(d).pow(s));
    let sum = box_sum(x, shifts, &weight, &|y| phi_truncated(y, s));
    let truncated = sum / BigRational::from_integer(BigInt::from(shifts.volume()));
    let value = times_tail(&truncated, &tail_factor(&x.primes, s));
    Ok(AverageResult {
        shifts: shifts.to_string(),
        t: x.t(),
        s,
        truncated,
        value,
        limit: inv_zeta(s + x.k as u32),
    })
}

/// Average of binary_f over the shift box, as an exact rational for the
/// truncation (an upper bound for the untruncated average).
pub fn binary_average(x: &TruncatedPoint, shifts: &LatticeBox) -> Result<BigRational> {
    check_box(x, shifts, &Budget::default())?;
    let sum = box_sum(x, shifts, &|_| BigRational::one(), &|y| {
        BigRational::from_integer(binary_f(y).value.into())
    });
    Ok(sum / BigRational::from_integer(BigInt::from(shifts.volume())))
}

/// Π_{i≤T}(1 − pᵢ^{−(s+k)}), the average of the truncated Φ_s over any box
/// whose sides are multiples of p₁⋯p_T.
pub fn aligned_closed_form(t: usize, s: u32, k: u32) -> Result<BigRational> {
    Ok(first_primes(t)?
        .into_iter()
        .fold(BigRational::one(), |acc, p| acc * one_minus_pow(p, s + k)))
}

pub fn adversarial_point(k: usize, shifts: &LatticeBox) -> Result<TruncatedPoint> {
    adversarial_point_with(k, shifts, &Budget::default())
}

/// The i-th shift n̄ᵢ gets the i-th prime pᵢ with residues −n̄ᵢ mod pᵢ, so
/// binary_f vanishes on every translate x + n̄ᵢ.
pub fn adversarial_point_with(k: usize, shifts: &LatticeBox, budget: &Budget) -> Result<TruncatedPoint> {
    if shifts.k() != k {
        return Err(Error::InvalidInput(format!(
            "shift box has dimension {}, expected {k}",
            shifts.k()
        )));
    }
    let vol = shifts.volume_u128().unwrap_or(u128::MAX);
    // one prime per shift; p_T ≈ T log T must stay sieveable
    let limit = budget.max_residue_vectors as u128 / 10;
    if vol > limit {
        return Err(Error::capacity("adversarial point primes", vol, limit));
    }
    let primes = first_primes(vol as usize)?;
    let mut residues = Vec::with_capacity(vol as usize);
    let mut i = 0;
    shifts.for_each_point(|n| {
        let p = primes[i] as i64;
        residues.push(n.iter().map(|&c| (-c).rem_euclid(p) as u64).collect());
        i += 1;
    });
    TruncatedPoint::new(k, residues)
}
