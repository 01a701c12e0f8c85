//! Sieve-built arithmetic tables and exact progression counting.
//!
//! [`PrimeTables`] comes from a linear (smallest-prime-factor) sieve, which
//! yields the primes, the Möbius function and a factorisation oracle in one
//! pass. [`JordanTables`] reuses the smallest-prime-factor column to evaluate
//! the Jordan totients J_j multiplicatively and keeps their running sums.
//!
//! All counting values are exact integers. Jordan values are held in `u64`
//! and prefix sums in `u128` with checked arithmetic; a value that does not
//! fit is reported as a capacity error rather than wrapped.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct PrimeTables {
    limit: u64,
    primes: Vec<u64>,
    /// `mobius[n]` for `n` in `0..=limit`; index 0 is unused and holds 0.
    mobius: Vec<i8>,
    /// `spf[n]` for `n` in `0..=limit`; `spf[0] = 0`, `spf[1] = 1`.
    spf: Vec<u32>,
}

impl PrimeTables {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// μ(n) for 1 ≤ n ≤ limit.
    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        self.mobius[n as usize]
    }

    pub fn mobius(&self) -> &[i8] {
        &self.mobius
    }

    /// Smallest prime factor of n (1 for n = 1).
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf(n) == n
    }

    /// Distinct prime factors of n, ascending.
    pub fn prime_divisors(&self, mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        out
    }

    /// Squarefree divisors of n together with μ(d).
    pub fn squarefree_divisors(&self, n: u64) -> Vec<(u64, i8)> {
        let mut out = vec![(1u64, 1i8)];
        for p in self.prime_divisors(n) {
            let len = out.len();
            for i in 0..len {
                let (d, m) = out[i];
                out.push((d * p, -m));
            }
        }
        out
    }

    /// Number of primes ≤ x, for x ≤ limit.
    pub fn prime_pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }
}

/// Linear sieve up to `n`.
pub fn build_prime_tables(n: u64) -> Result<PrimeTables> {
    build_prime_tables_with(n, &Budget::default())
}

pub fn build_prime_tables_with(n: u64, budget: &Budget) -> Result<PrimeTables> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "prime table limit must be at least 2, got {n}"
        )));
    }
    if n > u32::MAX as u64 {
        return Err(Error::capacity("prime table limit", n as u128, u32::MAX as u128));
    }
    // spf (4 bytes) + mobius (1 byte) per entry, primes ~ n / ln n * 8 bytes.
    budget.check_bytes("prime tables", (n as u128 + 1) * 6)?;

    let len = n as usize + 1;
    let mut spf = vec![0u32; len];
    let mut mobius = vec![0i8; len];
    let mut primes: Vec<u64> = Vec::new();
    spf[1] = 1;
    mobius[1] = 1;
    for i in 2..len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            mobius[i] = -1;
            primes.push(i as u64);
        }
        let si = spf[i] as u64;
        for &p in &primes {
            let ip = i as u64 * p;
            if p > si || ip > n {
                break;
            }
            spf[ip as usize] = p as u32;
            mobius[ip as usize] = if p == si { 0 } else { -mobius[i] };
        }
    }
    Ok(PrimeTables {
        limit: n,
        primes,
        mobius,
        spf,
    })
}

/// Trial-division factorisation, for arguments outside any sieve table.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// μ(n) by factorisation.
pub fn mobius_of(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// J_j(n) from the product formula n^j Π_{p|n} (1 − p^{−j}).
///
/// J_0 follows the convention J_0(1) = 1 and J_0(n) = 0 for n ≥ 2.
pub fn jordan_totient(j: u32, n: u64) -> BigUint {
    assert!(n >= 1, "jordan_totient needs n >= 1");
    if j == 0 {
        return if n == 1 { BigUint::one() } else { BigUint::zero() };
    }
    let mut acc = BigUint::one();
    for (p, e) in factorize(n) {
        let pj = BigUint::from(p).pow(j);
        // p^{je} − p^{j(e−1)} = p^{j(e−1)} (p^j − 1)
        acc *= pj.pow(e - 1) * (pj - 1u32);
    }
    acc
}

/// J_j(n) from the divisor sum Σ_{d|n} μ(d) (n/d)^j.
pub fn jordan_totient_divisor_sum(j: u32, n: u64) -> BigUint {
    assert!(n >= 1);
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let mut total = BigInt::zero();
    for mask in 0u32..(1 << primes.len()) {
        let mut d = 1u64;
        for (i, p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                d *= p;
            }
        }
        let term = BigInt::from(n / d).pow(j);
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total.to_biguint().expect("Jordan totient is non-negative")
}

/// J_0..J_{k−1} on 1..=limit with their running sums.
#[derive(Clone, Debug)]
pub struct JordanTables {
    k: u32,
    limit: u64,
    /// `values[j][n]`, index 0 unused.
    values: Vec<Vec<u64>>,
    /// `prefix[j][L] = Σ_{m ≤ L} J_j(m)`, with `prefix[j][0] = 0`.
    prefix: Vec<Vec<u128>>,
}

impl JordanTables {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn value(&self, j: u32, n: u64) -> BigUint {
        BigUint::from(self.values[j as usize][n as usize])
    }

    pub fn prefix(&self, j: u32, l: u64) -> BigUint {
        BigUint::from(self.prefix[j as usize][l as usize])
    }

    pub fn value_u64(&self, j: u32, n: u64) -> u64 {
        self.values[j as usize][n as usize]
    }

    pub fn prefix_u128(&self, j: u32, l: u64) -> u128 {
        self.prefix[j as usize][l as usize]
    }

    pub fn prefix_column(&self, j: u32) -> &[u128] {
        &self.prefix[j as usize]
    }
}

/// Builds J_j and Σ J_j for j < k up to `n`, sharing one sieve.
pub fn jordan_prefix_sums(k: u32, n: u64) -> Result<JordanTables> {
    jordan_prefix_sums_with(k, n, &Budget::default())
}

pub fn jordan_prefix_sums_with(k: u32, n: u64, budget: &Budget) -> Result<JordanTables> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("dimension k must be >= 2, got {k}")));
    }
    if n < 1 {
        return Err(Error::InvalidInput("Jordan table limit must be >= 1".into()));
    }
    budget.check_bytes("Jordan tables", (n as u128 + 1) * (k as u128 * 24 + 6))?;
    let tables = build_prime_tables_with(n.max(2), budget)?;
    jordan_from_primes(k, n, &tables)
}

pub fn jordan_from_primes(k: u32, n: u64, tables: &PrimeTables) -> Result<JordanTables> {
    if tables.limit() < n {
        return Err(Error::InvalidInput(format!(
            "prime tables reach {}, Jordan tables need {n}",
            tables.limit()
        )));
    }
    let len = n as usize + 1;
    let overflow = || Error::capacity("Jordan value", u128::MAX, u64::MAX as u128);
    let mut values = Vec::with_capacity(k as usize);
    let mut j0 = vec![0u64; len];
    j0[1] = 1;
    values.push(j0);
    for j in 1..k {
        let mut col = vec![0u64; len];
        col[1] = 1;
        for m in 2..len {
            let p = tables.spf(m as u64);
            let rest = m as u64 / p;
            let pj = p.checked_pow(j).ok_or_else(overflow)?;
            let factor = if rest % p == 0 { pj } else { pj - 1 };
            col[m] = col[rest as usize].checked_mul(factor).ok_or_else(overflow)?;
        }
        values.push(col);
    }
    let mut prefix = Vec::with_capacity(k as usize);
    for col in &values {
        let mut run = vec![0u128; len];
        let mut acc = 0u128;
        for m in 1..len {
            acc = acc
                .checked_add(col[m] as u128)
                .ok_or_else(|| Error::capacity("Jordan prefix sum", u128::MAX, u128::MAX))?;
            run[m] = acc;
        }
        prefix.push(run);
    }
    Ok(JordanTables {
        k,
        limit: n,
        values,
        prefix,
    })
}

/// |{n ∈ [m, m + l) : n ≡ r (mod d)}|.
pub fn count_in_progression(m: i64, l: u64, r: u64, d: u64) -> u64 {
    assert!(d >= 1 && r < d, "need d >= 1 and 0 <= r < d");
    let q = l / d;
    let rem = l % d;
    let offset = (r as i128 - m as i128).rem_euclid(d as i128) as u64;
    q + u64::from(offset < rem)
}

/// Same as [`count_in_progression`] for moduli beyond `u64`.
pub fn count_in_progression_u128(m: i64, l: u64, r: u128, d: u128) -> u64 {
    assert!(d >= 1 && r < d);
    let q = (l as u128 / d) as u64;
    let rem = l as u128 % d;
    // r − m mod d with m possibly negative.
    let m_mod = (m as i128).rem_euclid(i128::try_from(d).unwrap_or(i128::MAX)) as u128;
    let offset = if r >= m_mod { r - m_mod } else { d - (m_mod - r) };
    q + u64::from(offset < rem)
}
