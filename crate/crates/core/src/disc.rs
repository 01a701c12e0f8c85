//! Lattice points in discs D_k(0, √n): the totals A_k(n), the counts V′_k(n)
//! of points visible from the origin, and scans over n.
//!
//! The origin is counted in A_k(n) and never in V′_k(n).

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::constants::zeta_cached;
use crate::density::Verdict;
use crate::error::{Error, Result};
use crate::interval::RigorousInterval;
use crate::ntcore::mobius_of;
use crate::rational::{decimal, serde_q};

pub const MAX_DISC_K: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscCensus {
    pub k: u32,
    pub n: u64,
    pub total: u128,
    pub visible: u128,
    #[serde(with = "serde_q")]
    pub ratio: BigRational,
    pub ratio_decimal: String,
}

impl DiscCensus {
    fn new(k: u32, n: u64, total: u128, visible: u128) -> Self {
        let ratio = BigRational::new(BigInt::from(visible), BigInt::from(total));
        let ratio_decimal = decimal(&ratio, 15);
        DiscCensus {
            k,
            n,
            total,
            visible,
            ratio,
            ratio_decimal,
        }
    }
}

/// Cumulative A_k and V′_k for every squared radius 0..=n.
#[derive(Clone, Debug)]
pub struct DiscTables {
    k: u32,
    total: Vec<u128>,
    visible: Vec<u128>,
}

impl DiscTables {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn limit(&self) -> u64 {
        self.total.len() as u64 - 1
    }

    pub fn census(&self, n: u64) -> DiscCensus {
        DiscCensus::new(self.k, n, self.total[n as usize], self.visible[n as usize])
    }

    /// r_k(n), the number of lattice points with norm² exactly n.
    pub fn shell(&self, n: u64) -> u128 {
        let n = n as usize;
        self.total[n] - if n == 0 { 0 } else { self.total[n - 1] }
    }
}

fn check_args(k: u32, n: u64, budget: &Budget) -> Result<()> {
    if !(2..=MAX_DISC_K).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "disc dimension must be in 2..={MAX_DISC_K}, got {k}"
        )));
    }
    if n > budget.max_scan {
        return Err(Error::capacity("disc radius²", n as u128, budget.max_scan as u128));
    }
    // k convolutions of length n+1 against ~√n squares
    let work = k as u128 * (n as u128 + 1) * (2 * (n as f64).sqrt() as u128 + 1);
    if work > budget.max_point_tests as u128 * 100 {
        return Err(Error::capacity(
            "disc shell convolution",
            work,
            budget.max_point_tests as u128 * 100,
        ));
    }
    budget.check_bytes("disc shell tables", (n as u128 + 1) * 16 * 4)
}

/// r_j(m) for m ≤ n, j = k, from r_j = r_{j−1} ∗ r_1.
fn shell_counts(k: u32, n: u64) -> Vec<u128> {
    let len = n as usize + 1;
    let mut one = vec![0u128; len];
    let mut x = 0usize;
    while x * x < len {
        one[x * x] += if x == 0 { 1 } else { 2 };
        x += 1;
    }
    let squares: Vec<(usize, u128)> = one
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, c))
        .collect();
    let mut cur = one.clone();
    for _ in 1..k {
        cur = (0..len)
            .into_par_iter()
            .map(|m| {
                squares
                    .iter()
                    .take_while(|&&(s, _)| s <= m)
                    .map(|&(s, c)| c * cur[m - s])
                    .sum()
            })
            .collect();
    }
    cur
}

pub fn disc_tables(k: u32, n: u64) -> Result<DiscTables> {
    disc_tables_with(k, n, &Budget::default())
}

/// Primitive shells come from p_k(m) = Σ_{d² | m} μ(d) r_k(m/d²) for m ≥ 1.
pub fn disc_tables_with(k: u32, n: u64, budget: &Budget) -> Result<DiscTables> {
    check_args(k, n, budget)?;
    let r = shell_counts(k, n);
    let len = r.len();
    let mut prim = vec![0i128; len];
    let mut d = 1usize;
    while d * d < len {
        let mu = mobius_of(d as u64) as i128;
        if mu != 0 {
            let step = d * d;
            for (j, m) in (step..len).step_by(step).enumerate() {
                prim[m] += mu * r[j + 1] as i128;
            }
        }
        d += 1;
    }
    let mut total = Vec::with_capacity(len);
    let mut visible = Vec::with_capacity(len);
    let (mut t, mut v) = (0u128, 0u128);
    for m in 0..len {
        t += r[m];
        if m > 0 {
            v += u128::try_from(prim[m]).expect("primitive count is non-negative");
        }
        total.push(t);
        visible.push(v);
    }
    Ok(DiscTables { k, total, visible })
}

pub fn disc_census(k: u32, n: u64) -> Result<DiscCensus> {
    Ok(disc_tables(k, n)?.census(n))
}

pub fn disc_census_with(k: u32, n: u64, budget: &Budget) -> Result<DiscCensus> {
    Ok(disc_tables_with(k, n, budget)?.census(n))
}

/// Direct enumeration of the ball; the oracle for [`disc_tables`].
pub fn disc_census_bruteforce(k: u32, n: u64) -> DiscCensus {
    fn walk(depth: u32, left: u64, g: u64, total: &mut u128, visible: &mut u128) {
        if depth == 0 {
            *total += 1;
            if g == 1 {
                *visible += 1;
            }
            return;
        }
        let r = left.isqrt() as i64;
        for x in -r..=r {
            let ax = x.unsigned_abs();
            walk(depth - 1, left - ax * ax, g.gcd(&ax), total, visible);
        }
    }
    let (mut total, mut visible) = (0, 0);
    walk(k, n, 0, &mut total, &mut visible);
    DiscCensus::new(k, n, total, visible)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscSdResult {
    pub k: u32,
    pub n: u64,
    pub argmin: u64,
    pub min: DiscCensus,
}

pub fn disc_sd_scan(k: u32, n: u64) -> Result<DiscSdResult> {
    disc_sd_scan_with(k, n, &Budget::default())
}

/// Minimum of V′_k(m)/A_k(m) over 1 ≤ m ≤ n, smallest argmin on ties.
pub fn disc_sd_scan_with(k: u32, n: u64, budget: &Budget) -> Result<DiscSdResult> {
    if n == 0 {
        return Err(Error::InvalidInput("disc scans start at n = 1".into()));
    }
    let t = disc_tables_with(k, n, budget)?;
    let mut best = 1usize;
    for m in 2..=n as usize {
        // v_m / a_m < v_b / a_b
        let lhs = t.visible[m] * t.total[best];
        let rhs = t.visible[best] * t.total[m];
        if lhs.cmp(&rhs) == Ordering::Less {
            best = m;
        }
    }
    Ok(DiscSdResult {
        k,
        n,
        argmin: best as u64,
        min: t.census(best as u64),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscRow {
    pub n: u64,
    pub total: u128,
    pub visible: u128,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscScanReport {
    pub k: u32,
    pub n: u64,
    /// n with V′_k(n) < A_k(n)/ζ(k) certified.
    pub exceptional: Vec<u64>,
    pub good_count: u64,
    pub undecided: Vec<u64>,
    #[serde(with = "serde_q")]
    pub exceptional_fraction: BigRational,
    pub fraction_decimal: String,
}

pub fn disc_exceptional_scan(k: u32, n: u64) -> Result<(DiscScanReport, Vec<DiscRow>)> {
    disc_exceptional_scan_with(k, n, &Budget::default())
}

/// Three-way comparison of V′_k(m)·ζ(k) with A_k(m) for 1 ≤ m ≤ n.
pub fn disc_exceptional_scan_with(k: u32, n: u64, budget: &Budget) -> Result<(DiscScanReport, Vec<DiscRow>)> {
    if n == 0 {
        return Err(Error::InvalidInput("disc scans start at n = 1".into()));
    }
    let t = disc_tables_with(k, n, budget)?;
    let z = zeta_cached(k);
    let rows: Vec<DiscRow> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let c = t.census(m);
            DiscRow {
                n: m,
                total: c.total,
                visible: c.visible,
                verdict: disc_verdict(c.visible, c.total, &z),
            }
        })
        .collect();
    let exceptional: Vec<u64> = rows.iter().filter(|r| r.verdict == Verdict::Bad).map(|r| r.n).collect();
    let undecided: Vec<u64> = rows
        .iter()
        .filter(|r| r.verdict == Verdict::Undecided)
        .map(|r| r.n)
        .collect();
    let good_count = rows.iter().filter(|r| r.verdict == Verdict::Good).count() as u64;
    let exceptional_fraction = BigRational::new(BigInt::from(exceptional.len()), BigInt::from(n));
    let report = DiscScanReport {
        k,
        n,
        good_count,
        undecided,
        fraction_decimal: decimal(&exceptional_fraction, 15),
        exceptional_fraction,
        exceptional,
    };
    Ok((report, rows))
}

/// Bad when V′·ζ(k) < A for every ζ(k) in the enclosure.
fn disc_verdict(visible: u128, total: u128, zeta: &RigorousInterval) -> Verdict {
    let v = BigRational::from_integer(BigInt::from(visible));
    let a = BigRational::from_integer(BigInt::from(total));
    let lo = &v * zeta.lo();
    let hi = &v * zeta.hi();
    if hi < a {
        Verdict::Bad
    } else if lo > a {
        Verdict::Good
    } else {
        Verdict::Undecided
    }
}
