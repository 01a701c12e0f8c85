//! Selberg sieve weights and a rigorous upper bound on |V(S) ∩ B|.
//!
//! Weights are exact rationals. For squarefree d < z,
//!
//! λ_d = μ(d) · Π_{p|d}(1 + g(p)) · G_d(z/d) / G(z),
//!
//! where g(p) = s(p)/(p^k − s(p)), G(z) = Σ_{t<z} μ²(t) g(t) and G_d(y)
//! restricts that sum to t coprime to d. With these weights the main
//! quadratic form equals 1/G(z) exactly.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::constants::{inv_zeta, FixedProduct};
use crate::error::{Error, Result};
use crate::interval::{RigorousInterval, DEFAULT_BITS};
use crate::ntcore::build_prime_tables;
use crate::rational::serde_q;
use crate::visibility::{count_invisible_exact_with, residue_profile, s_of_prime, LatticeBox, PointSet};

/// Largest sieve level accepted; weights are exact rationals whose
/// denominators grow with every prime below z.
pub const MAX_SIEVE_LEVEL: u64 = 20_000;

#[derive(Clone, Debug)]
pub struct SieveContext {
    pub k: u32,
    pub z: f64,
    /// Smallest integer ≥ z, so that d < z iff d < z_ceil.
    pub z_ceil: u64,
    pub sieve_primes: Vec<u64>,
    pub s_of_p: Vec<u64>,
    /// Squarefree d < z, ascending.
    pub support: Vec<u64>,
    /// g(d) for every d in `support`.
    pub g: HashMap<u64, BigRational>,
    pub g_z: BigRational,
    pub lambdas: BTreeMap<u64, BigRational>,
    s_cache: HashMap<u64, u64>,
}

impl SieveContext {
    pub fn lambda(&self, d: u64) -> BigRational {
        self.lambdas.get(&d).cloned().unwrap_or_else(BigRational::zero)
    }

    /// s(d) for squarefree d whose prime factors are sieve primes.
    pub fn s_of(&self, d: u64) -> u64 {
        self.prime_factors(d).iter().map(|p| self.s_cache[p]).product()
    }

    /// g(d) for squarefree d built from sieve primes.
    pub fn g_of(&self, d: u64) -> BigRational {
        if let Some(v) = self.g.get(&d) {
            return v.clone();
        }
        self.prime_factors(d)
            .iter()
            .map(|&p| self.g_prime(p))
            .fold(BigRational::one(), |a, b| a * b)
    }

    fn g_prime(&self, p: u64) -> BigRational {
        let s = self.s_cache[&p];
        BigRational::new(BigInt::from(s), BigInt::from(p).pow(self.k) - s)
    }

    fn prime_factors(&self, mut d: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for &p in &self.sieve_primes {
            if d == 1 {
                break;
            }
            if d % p == 0 {
                out.push(p);
                d /= p;
            }
        }
        assert_eq!(d, 1, "argument has a prime factor outside the sieve range");
        out
    }

    /// Σ_{[d₁,d₂] = m} λ_{d₁} λ_{d₂}, keyed by m.
    pub fn lcm_coefficients(&self) -> BTreeMap<u64, BigRational> {
        let ds: Vec<(&u64, &BigRational)> = self.lambdas.iter().filter(|(_, l)| !l.is_zero()).collect();
        let mut out: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (i, (d1, l1)) in ds.iter().enumerate() {
            for (d2, l2) in &ds[i..] {
                let m = d1.lcm(d2);
                let mut term = *l1 * *l2;
                if d1 != d2 {
                    term *= BigRational::from_integer(2.into());
                }
                *out.entry(m).or_insert_with(BigRational::zero) += term;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

fn squarefree_below(limit: u64, primes: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let len = out.len();
        for i in 0..len {
            let d = out[i] * p;
            if d < limit {
                out.push(d);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn build_sieve_context(s: &PointSet, k: u32, z: f64) -> Result<SieveContext> {
    if s.k() != k as usize {
        return Err(Error::InvalidInput(format!(
            "point set has dimension {}, expected {k}",
            s.k()
        )));
    }
    if !(z.is_finite() && z >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "sieve level must be a finite number >= 1, got {z}"
        )));
    }
    let z_ceil = z.ceil() as u64;
    if z_ceil > MAX_SIEVE_LEVEL {
        return Err(Error::capacity("sieve level", z_ceil as u128, MAX_SIEVE_LEVEL as u128));
    }
    let sieve_primes: Vec<u64> = if z_ceil > 2 {
        build_prime_tables(z_ceil)?
            .primes()
            .iter()
            .copied()
            .filter(|&p| p < z_ceil)
            .collect()
    } else {
        Vec::new()
    };
    let mut s_cache = HashMap::new();
    let mut s_of_p = Vec::with_capacity(sieve_primes.len());
    for &p in &sieve_primes {
        let sp = s_of_prime(s, p) as u64;
        let pk = BigUint::from(p).pow(k);
        if BigUint::from(sp) >= pk {
            return Err(Error::DegenerateDensity { p, k });
        }
        s_cache.insert(p, sp);
        s_of_p.push(sp);
    }
    let support = squarefree_below(z_ceil, &sieve_primes);
    let mut ctx = SieveContext {
        k,
        z,
        z_ceil,
        sieve_primes,
        s_of_p,
        support: support.clone(),
        g: HashMap::new(),
        g_z: BigRational::zero(),
        lambdas: BTreeMap::new(),
        s_cache,
    };
    let mut g = HashMap::with_capacity(support.len());
    for &d in &support {
        g.insert(d, ctx.g_of(d));
    }
    ctx.g = g;
    let g_z: BigRational = support.iter().map(|d| &ctx.g[d]).sum();
    let mut lambdas = BTreeMap::new();
    for &d in &support {
        let ps = ctx.prime_factors(d);
        let mu = if ps.len() % 2 == 0 { 1 } else { -1 };
        let boost = ps
            .iter()
            .map(|&p| BigRational::one() + ctx.g_prime(p))
            .fold(BigRational::one(), |a, b| a * b);
        // G_d(z/d): t·d < z, gcd(t, d) = 1
        let mut g_d = BigRational::zero();
        for &t in &support {
            if t * d >= z_ceil {
                break;
            }
            if t.gcd(&d) == 1 {
                g_d += &ctx.g[&t];
            }
        }
        let lam = boost * g_d / &g_z * BigRational::from_integer(mu.into());
        lambdas.insert(d, lam);
    }
    ctx.g_z = g_z;
    ctx.lambdas = lambdas;
    Ok(ctx)
}

/// Σ_{d₁,d₂<z} λ_{d₁} λ_{d₂} s([d₁,d₂]) / [d₁,d₂]^k, evaluated exactly.
pub fn sigma1_identity_check(ctx: &SieveContext) -> BigRational {
    ctx.lcm_coefficients()
        .iter()
        .map(|(&m, c)| c * BigRational::new(BigInt::from(ctx.s_of(m)), BigInt::from(m).pow(ctx.k)))
        .sum()
}

/// λ_d recomputed from u_l = μ(l) g(l)/G(z) through
/// λ_d = (d^k / s(d)) Σ_{l<z, d|l} μ(l/d) u_l.
pub fn lambdas_via_u(ctx: &SieveContext) -> BTreeMap<u64, BigRational> {
    let mu = |d: u64| -> i64 {
        if ctx.prime_factors(d).len() % 2 == 0 {
            1
        } else {
            -1
        }
    };
    let u: HashMap<u64, BigRational> = ctx
        .support
        .iter()
        .map(|&l| (l, &ctx.g[&l] / &ctx.g_z * BigRational::from_integer(mu(l).into())))
        .collect();
    ctx.support
        .iter()
        .map(|&d| {
            let mut acc = BigRational::zero();
            for &l in &ctx.support {
                if l % d == 0 {
                    let sign = mu(l / d);
                    acc += &u[&l] * BigRational::from_integer(sign.into());
                }
            }
            let scale = BigRational::new(BigInt::from(d).pow(ctx.k), BigInt::from(ctx.s_of(d)));
            (d, acc * scale)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RigorousBound {
    /// Σ λ_{d₁} λ_{d₂} |I_{[d₁,d₂]}|, an upper bound on |V(S) ∩ B|.
    #[serde(with = "serde_q")]
    pub quadratic_form_value: BigRational,
    /// vol(B) / G(z)
    #[serde(with = "serde_q")]
    pub main_term: BigRational,
    /// quadratic form minus main term
    #[serde(with = "serde_q")]
    pub residual: BigRational,
    #[serde(with = "serde_q")]
    pub g_z: BigRational,
    pub z_used: f64,
    pub support_size: usize,
}

pub fn rigorous_upper_bound(s: &PointSet, b: &LatticeBox, z: f64) -> Result<RigorousBound> {
    rigorous_upper_bound_with(s, b, z, &Budget::default())
}

pub fn rigorous_upper_bound_with(s: &PointSet, b: &LatticeBox, z: f64, budget: &Budget) -> Result<RigorousBound> {
    if s.k() != b.k() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: point set has k = {}, box has k = {}",
            s.k(),
            b.k()
        )));
    }
    let ctx = build_sieve_context(s, b.k() as u32, z)?;
    let pairs = (ctx.support.len() as u128).pow(2);
    if pairs > budget.max_point_tests as u128 {
        return Err(Error::capacity(
            "sieve weight pairs",
            pairs,
            budget.max_point_tests as u128,
        ));
    }
    let coeffs: Vec<(u64, BigRational)> = ctx.lcm_coefficients().into_iter().collect();
    let terms: Vec<Result<BigRational>> = coeffs
        .par_iter()
        .map(|(m, c)| {
            let i = count_invisible_exact_with(s, b, *m, budget)?;
            Ok(c * BigRational::from_integer(BigInt::from(i)))
        })
        .collect();
    let mut q = BigRational::zero();
    for t in terms {
        q += t?;
    }
    let vol = BigRational::from_integer(BigInt::from(b.volume()));
    let main_term = &vol / &ctx.g_z;
    Ok(RigorousBound {
        residual: &q - &main_term,
        quadratic_form_value: q,
        main_term,
        g_z: ctx.g_z.clone(),
        z_used: z,
        support_size: ctx.support.len(),
    })
}

/// Balancing choice of z: L_k^{3/(2(k−1))} for k ≥ 3; for k = 2,
/// (L₁L₂)^{1/3} when L₂ ≥ √L₁ and L₂ otherwise. Never below 3.
pub fn default_z(b: &LatticeBox, k: u32) -> f64 {
    let l = b.sorted_lens();
    let z = if k >= 3 {
        (l[l.len() - 1] as f64).powf(3.0 / (2.0 * (k as f64 - 1.0)))
    } else {
        let (l1, l2) = (l[0] as f64, *l.get(1).unwrap_or(&l[0]) as f64);
        if l2 >= l1.sqrt() {
            let c = (l1 * l2).cbrt();
            // snap values within rounding of an integer
            if (c - c.round()).abs() < 1e-9 * c {
                c.round()
            } else {
                c
            }
        } else {
            l2
        }
    };
    z.max(3.0)
}

/// Π_{p≤P}(1 − s(p)/p^k) · [1 − r Σ_{n>P} n^{−k}, 1], or [0, 0] when some
/// s(p) = p^k.
pub fn density_main_term(s: &PointSet, k: u32, p_max: u64) -> Result<RigorousInterval> {
    check_dim(s, k)?;
    let Some(head) = head_product(s, k, p_max)? else {
        return Ok(RigorousInterval::zero());
    };
    let r = BigRational::from_integer(s.r().into());
    let mut factor = BigRational::one() - r * crate::constants::power_tail_bound(p_max.max(1), k);
    if factor.is_negative() {
        factor = BigRational::zero();
    }
    Ok(RigorousInterval::new(head.lo() * factor, head.hi().clone()).round_out(DEFAULT_BITS))
}

fn check_dim(s: &PointSet, k: u32) -> Result<()> {
    if k < 2 || s.k() != k as usize {
        return Err(Error::InvalidInput(format!(
            "need k >= 2 matching the point set dimension, got k = {k}, point set k = {}",
            s.k()
        )));
    }
    Ok(())
}

/// Π_{p ≤ P}(1 − s(p)/p^k), or None if some factor vanishes.
fn head_product(s: &PointSet, k: u32, p_max: u64) -> Result<Option<RigorousInterval>> {
    let primes: Vec<u64> = if p_max >= 2 {
        build_prime_tables(p_max)?.primes().to_vec()
    } else {
        Vec::new()
    };
    let diameter = s.diameter();
    let r = s.r() as u64;
    let mut prod = FixedProduct::new(DEFAULT_BITS + 24);
    for &p in &primes {
        let sp = if p > diameter {
            r
        } else {
            residue_profile(s, p).s_p as u64
        };
        let pk = BigInt::from(p).pow(k);
        if BigInt::from(sp) >= pk {
            return Ok(None);
        }
        prod.mul_ratio(&(&pk - sp), &pk);
    }
    Ok(Some(prod.finish()))
}

/// Tight enclosure of D(V(S)) = Π_p (1 − s(p)/p^k).
///
/// Primes up to P ≥ diam(S) are multiplied in directly. Beyond P every
/// s(p) = r and the tail is pinned between T^r·(1 − δ) and T^r, with
/// T = (1/ζ(k)) / Π_{p≤P}(1 − p^{−k}) and
/// δ = C(r,2) (1 − P^{−k})^{−r} Σ_{n>P} n^{−2k}.
///
/// The default P makes δ about 1e-20 (capped at 2·10⁶), far below any gap
/// the scanners need to resolve.
pub fn density_enclosure(s: &PointSet, k: u32) -> Result<RigorousInterval> {
    let r = s.r() as f64;
    let pairs = (r * (r - 1.0) / 2.0).max(1.0);
    let p = (1e20 * pairs).powf(1.0 / (2.0 * k as f64 - 1.0)).ceil() as u64;
    density_enclosure_at(s, k, p.clamp(100, 2_000_000))
}

/// [`density_enclosure`] with an explicit head cutoff (raised to diam(S)
/// when smaller).
pub fn density_enclosure_at(s: &PointSet, k: u32, p_max: u64) -> Result<RigorousInterval> {
    check_dim(s, k)?;
    let r = s.r() as u32;
    let mut p_max = p_max.max(s.diameter()).max(2);
    while (p_max as f64).powi(k as i32) < 2.0 * r as f64 {
        p_max *= 2;
    }
    let Some(head) = head_product(s, k, p_max)? else {
        return Ok(RigorousInterval::zero());
    };
    let primes = build_prime_tables(p_max)?.primes().to_vec();
    let euler = crate::constants::euler_partial(&primes, k, DEFAULT_BITS + 24);
    let t = inv_zeta(k).div(&euler).round_out(DEFAULT_BITS + 24);
    let t_r = t.powi(r).round_out(DEFAULT_BITS + 24);
    let pk = BigRational::from_integer(BigInt::from(p_max).pow(k));
    let c2 = BigRational::from_integer(BigInt::from(r as u64 * (r as u64).saturating_sub(1) / 2));
    let shrink = (BigRational::one() - pk.recip()).pow(-(r as i32));
    let tail2 = BigRational::new(
        BigInt::one(),
        BigInt::from(2 * k - 1) * BigInt::from(p_max).pow(2 * k - 1),
    );
    let delta = c2 * shrink * tail2;
    let tail = RigorousInterval::new(t_r.lo() * (BigRational::one() - delta), t_r.hi().clone());
    Ok((&head * &tail).round_out(DEFAULT_BITS))
}
