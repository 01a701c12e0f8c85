//! Schnirelmann-density certificates and bad-visibility scans over cubes.
//!
//! A scan compares the exact ratio |V(S) ∩ [1, L]^k| / L^k with an enclosure
//! of the asymptotic density and returns one of three verdicts. A
//! certificate combines a scan prefix with an effective lower bound that is
//! monotone in L, which makes the infimum a finite computation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::constants::{inv_zeta, ln_u64, pi, zeta_cached, FixedProduct};
use crate::error::{Error, Result};
use crate::interval::{RigorousInterval, DEFAULT_BITS};
use crate::ntcore::build_prime_tables;
use crate::rational::{decimal, serde_q};
use crate::selberg::density_enclosure_at;
use crate::visibility::{count_visible_cubes_origin_with, count_visible_cubes_with, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// ratio certified below the density
    Bad,
    /// ratio certified above the density
    Good,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bad => "bad",
            Verdict::Good => "good",
            Verdict::Undecided => "undecided",
        })
    }
}

/// count / L^k, compared exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CubeRatio {
    pub count: u128,
    pub l: u64,
    pub k: u32,
}

impl CubeRatio {
    pub fn new(count: u128, l: u64, k: u32) -> Self {
        CubeRatio { count, l, k }
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::from(self.l).pow(self.k)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count), BigInt::from(self.denominator()))
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / (self.l as f64).powi(self.k as i32)
    }

    pub fn cmp_exact(&self, other: &CubeRatio) -> Ordering {
        let (a, b) = (self.to_f64(), other.to_f64());
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
            return a.partial_cmp(&b).expect("finite ratios");
        }
        let lhs = BigUint::from(self.count) * other.denominator();
        let rhs = BigUint::from(other.count) * self.denominator();
        lhs.cmp(&rhs)
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        let lhs = BigInt::from(self.count) * q.denom();
        let rhs = q.numer() * BigInt::from(self.denominator());
        lhs.cmp(&rhs)
    }
}

/// Verdicts against a density enclosure, with an f64 pre-screen that only
/// decides when the margin dwarfs rounding error.
pub struct DensityComparator {
    density: RigorousInterval,
    lo_f: f64,
    hi_f: f64,
}

impl DensityComparator {
    pub fn new(density: RigorousInterval) -> Self {
        let lo_f = density.lo_f64();
        let hi_f = density.hi_f64();
        DensityComparator { density, lo_f, hi_f }
    }

    pub fn density(&self) -> &RigorousInterval {
        &self.density
    }

    pub fn verdict(&self, r: &CubeRatio) -> Verdict {
        let x = r.to_f64();
        const MARGIN: f64 = 1e-12;
        if x < self.lo_f - MARGIN {
            return Verdict::Bad;
        }
        if x > self.hi_f + MARGIN {
            return Verdict::Good;
        }
        if r.cmp_rational(self.density.lo()) == Ordering::Less {
            Verdict::Bad
        } else if r.cmp_rational(self.density.hi()) == Ordering::Greater {
            Verdict::Good
        } else {
            Verdict::Undecided
        }
    }
}

/// Head cutoffs tried in turn when an enclosure leaves some L undecided.
const DENSITY_LADDER: [u64; 5] = [1_000, 10_000, 100_000, 1_000_000, 2_000_000];

/// Enclosure of D(V(S)); for S = {0} this is 1/ζ(k).
fn density_for(s: &PointSet, k: u32, p_max: u64) -> Result<RigorousInterval> {
    if s.is_origin() {
        Ok(inv_zeta(k))
    } else {
        density_enclosure_at(s, k, p_max)
    }
}

/// Classifies every L, tightening the density enclosure only while some L
/// remain undecided.
fn classify_all(s: &PointSet, k: u32, counts: &[u128]) -> Result<(Vec<Verdict>, RigorousInterval)> {
    let n = counts.len() - 1;
    let mut verdicts = vec![Verdict::Undecided; n + 1];
    let mut pending: Vec<usize> = (1..=n).collect();
    let mut density = RigorousInterval::new(BigRational::zero(), BigRational::one());
    for (step, &p) in DENSITY_LADDER.iter().enumerate() {
        if step > 0 && (pending.is_empty() || s.is_origin()) {
            break;
        }
        let cmp = DensityComparator::new(density_for(s, k, p)?);
        pending.retain(|&l| {
            let v = cmp.verdict(&CubeRatio::new(counts[l], l as u64, k));
            verdicts[l] = v;
            v == Verdict::Undecided
        });
        density = cmp.density;
    }
    Ok((verdicts, density))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub l: u64,
    pub count: u128,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub points: String,
    pub k: u32,
    /// Scanned range is [1, n].
    pub n: u64,
    pub bad_count: u64,
    pub good_count: u64,
    pub undecided: Vec<u64>,
    /// Every L with a certified-bad ratio, ascending.
    pub bad: Vec<u64>,
    pub l_min: u64,
    #[serde(with = "serde_q")]
    pub sd_estimate: BigRational,
    pub sd_decimal: String,
    pub density: RigorousInterval,
}

fn argmin(counts: &[u128], k: u32, from: usize, to: usize) -> usize {
    let mut best = from;
    for l in from + 1..=to {
        let a = CubeRatio::new(counts[l], l as u64, k);
        let b = CubeRatio::new(counts[best], best as u64, k);
        if a.cmp_exact(&b) == Ordering::Less {
            best = l;
        }
    }
    best
}

fn cube_counts(s: &PointSet, n: u64, budget: &Budget) -> Result<Vec<u128>> {
    if s.is_origin() && s.k() >= 2 {
        count_visible_cubes_origin_with(s.k() as u32, n, budget)
    } else {
        count_visible_cubes_with(s, n, budget)
    }
}

pub fn scan_bad_visibility(s: &PointSet, k: u32, n: u64) -> Result<ScanReport> {
    scan_bad_visibility_with(s, k, n, &Budget::default()).map(|(r, _)| r)
}

/// Scan over [1, N] returning the report and one row per L.
pub fn scan_bad_visibility_with(s: &PointSet, k: u32, n: u64, budget: &Budget) -> Result<(ScanReport, Vec<ScanRow>)> {
    if s.k() != k as usize || k < 2 {
        return Err(Error::InvalidInput(format!(
            "need k >= 2 matching the point set dimension, got k = {k}, point set k = {}",
            s.k()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("scan limit must be positive".into()));
    }
    if n > budget.max_scan {
        return Err(Error::capacity("scan limit", n as u128, budget.max_scan as u128));
    }
    let counts = cube_counts(s, n, budget)?;
    scan_from_counts(s, k, &counts)
}

fn scan_from_counts(s: &PointSet, k: u32, counts: &[u128]) -> Result<(ScanReport, Vec<ScanRow>)> {
    let n = counts.len() - 1;
    let (verdicts, density) = classify_all(s, k, counts)?;
    let mut report = ScanReport {
        points: s.to_string(),
        k,
        n: n as u64,
        bad_count: 0,
        good_count: 0,
        undecided: Vec::new(),
        bad: Vec::new(),
        l_min: 0,
        sd_estimate: BigRational::zero(),
        sd_decimal: String::new(),
        density,
    };
    let mut rows = Vec::with_capacity(n);
    for l in 1..=n {
        match verdicts[l] {
            Verdict::Bad => {
                report.bad_count += 1;
                report.bad.push(l as u64);
            }
            Verdict::Good => report.good_count += 1,
            Verdict::Undecided => report.undecided.push(l as u64),
        }
        rows.push(ScanRow {
            l: l as u64,
            count: counts[l],
            verdict: verdicts[l],
        });
    }
    let best = argmin(counts, k, 1, n);
    report.l_min = best as u64;
    report.sd_estimate = CubeRatio::new(counts[best], best as u64, k).to_rational();
    report.sd_decimal = decimal(&report.sd_estimate, 15);
    Ok((report, rows))
}

/// Every L ≤ N whose origin-cube ratio is certified below 1/ζ(k).
pub fn exceptional_scan_cubes(k: u32, n: u64) -> Result<ScanReport> {
    exceptional_scan_cubes_with(k, n, &Budget::default())
}

pub fn exceptional_scan_cubes_with(k: u32, n: u64, budget: &Budget) -> Result<ScanReport> {
    scan_bad_visibility_with(&PointSet::origin(k as usize), k, n, budget).map(|(r, _)| r)
}

/// Certified lower bound 6/π² − log L / L on |V₂ ∩ [1, L]²| / L², L ≥ 9.
pub fn effective_lower_bound_v2(l: u64) -> Result<RigorousInterval> {
    if l < 9 {
        return Err(Error::Domain(format!("the V2 bound needs L >= 9, got {l}")));
    }
    let p = pi(DEFAULT_BITS);
    let six_over_pi2 = (&p * &p).recip().scale(&BigRational::from_integer(6.into()));
    let log_term = ln_u64(l, DEFAULT_BITS).scale(&BigRational::new(BigInt::one(), BigInt::from(l)));
    Ok((&six_over_pi2 - &log_term).round_out(DEFAULT_BITS))
}

/// Certified lower bound 1/ζ(3) − 3ζ(2)/L − (2 log L + 4)/L², L ≥ 2.
pub fn effective_lower_bound_v3(l: u64) -> Result<RigorousInterval> {
    if l < 2 {
        return Err(Error::Domain(format!("the V3 bound needs L >= 2, got {l}")));
    }
    let inv_l = BigRational::new(BigInt::one(), BigInt::from(l));
    let inv_l2 = &inv_l * &inv_l;
    let a = inv_zeta(3);
    let b = zeta_cached(2).scale(&(&inv_l * BigRational::from_integer(3.into())));
    let two_log = ln_u64(l, DEFAULT_BITS).scale(&BigRational::from_integer(2.into()));
    let c = (&two_log + &RigorousInterval::from_integer(4)).scale(&inv_l2);
    Ok((&(&a - &b) - &c).round_out(DEFAULT_BITS))
}

/// Enclosure of the lower bound for A = V({(1,0),(0,1)}):
///
/// Π_{i≤s}(1 − 2/pᵢ²) − 2Σ_{s<i≤π(L)} pᵢ^{−2} − (2/L)Π_{i≤s}(1 + 2/pᵢ)
///   − (4/L)Σ_{s<i≤π(L)} 1/pᵢ − 3^s/L² − 2π(L)/L².
pub fn effective_lower_bound_pair(s: u32, l: u64) -> Result<RigorousInterval> {
    PairBound::new(s as usize, l)?.lower(s, l)
}

/// Primes with prefix sums of 1/p² and 1/p, for repeated evaluation of the
/// pair bound.
pub struct PairBound {
    primes: Vec<u64>,
    limit: u64,
    /// (floor, ceil) of 2^SUM_BITS · Σ_{j<i} 1/p_j²
    inv_sq: Vec<(u128, u128)>,
    /// (floor, ceil) of 2^SUM_BITS · Σ_{j<i} 1/p_j
    inv: Vec<(u128, u128)>,
}

const SUM_BITS: u32 = 100;

impl PairBound {
    /// Covers every s' ≤ s and every L ≤ max(max_l, p_s).
    pub fn new(s: usize, max_l: u64) -> Result<Self> {
        let (primes, limit) = first_primes_and_up_to(s, max_l)?;
        let one = 1u128 << SUM_BITS;
        let prefix = |den: &dyn Fn(u64) -> u128| {
            let mut out = Vec::with_capacity(primes.len() + 1);
            let (mut lo, mut hi) = (0u128, 0u128);
            out.push((0, 0));
            for &p in &primes {
                let d = den(p);
                lo += one / d;
                hi += one.div_ceil(d);
                out.push((lo, hi));
            }
            out
        };
        let inv_sq = prefix(&|p| p as u128 * p as u128);
        let inv = prefix(&|p| p as u128);
        Ok(PairBound {
            primes,
            limit,
            inv_sq,
            inv,
        })
    }

    pub fn max_l(&self) -> u64 {
        self.limit
    }

    pub fn lower(&self, s: u32, l: u64) -> Result<RigorousInterval> {
        if s == 0 || l < 2 {
            return Err(Error::Domain(format!(
                "the pair bound needs s >= 1 and L >= 2, got s = {s}, L = {l}"
            )));
        }
        let su = s as usize;
        if self.primes.len() < su || l > self.max_l() {
            return Err(Error::InvalidInput("prime table too short for the pair bound".into()));
        }
        let head = &self.primes[..su];
        let pi_l = self.primes.partition_point(|&p| p <= l);
        let bits = DEFAULT_BITS + 16;

        let mut prod_minus = FixedProduct::new(bits);
        for &p in head {
            prod_minus.mul_u128(p as u128 * p as u128 - 2, p as u128 * p as u128);
        }
        let prod_minus = prod_minus.finish();
        // Π(1 + 2/p) is exact and small enough to keep as a rational
        let prod_plus = head.iter().fold(BigRational::one(), |acc, &p| {
            acc * BigRational::new(BigInt::from(p + 2), BigInt::from(p))
        });
        let range_sum = |pre: &[(u128, u128)]| {
            if pi_l <= su {
                return RigorousInterval::zero();
            }
            let scale = BigInt::one() << SUM_BITS;
            let lo = pre[pi_l].0.saturating_sub(pre[su].1);
            let hi = pre[pi_l].1 - pre[su].0;
            RigorousInterval::new(
                BigRational::new(BigInt::from(lo), scale.clone()),
                BigRational::new(BigInt::from(hi), scale),
            )
        };
        let inv_sq = range_sum(&self.inv_sq);
        let inv = range_sum(&self.inv);

        let lq = BigRational::from_integer(l.into());
        let l2 = &lq * &lq;
        let two = BigRational::from_integer(2.into());
        let four = BigRational::from_integer(4.into());
        let three_s = BigRational::from_integer(BigInt::from(3u32).pow(s));
        let point = RigorousInterval::point;

        let mut acc = prod_minus;
        acc = &acc - &inv_sq.scale(&two);
        acc = &acc - &point(&two * &prod_plus / &lq);
        acc = &acc - &inv.scale(&(&four / &lq));
        acc = &acc - &point(three_s / &l2);
        acc = &acc - &point(&two * BigRational::from_integer(pi_l.into()) / &l2);
        Ok(acc.round_out(DEFAULT_BITS))
    }
}

/// f(s, L) = D(A) − (pair lower bound).
pub fn pair_f(s: u32, l: u64) -> Result<RigorousInterval> {
    let d = pair_density()?;
    Ok((&d - &effective_lower_bound_pair(s, l)?).round_out(DEFAULT_BITS))
}

fn pair_points() -> PointSet {
    PointSet::new(vec![vec![1, 0], vec![0, 1]]).expect("two distinct points")
}

fn pair_density() -> Result<RigorousInterval> {
    static CACHE: std::sync::OnceLock<RigorousInterval> = std::sync::OnceLock::new();
    if let Some(d) = CACHE.get() {
        return Ok(d.clone());
    }
    let d = crate::selberg::density_enclosure(&pair_points(), 2)?;
    Ok(CACHE.get_or_init(|| d).clone())
}

/// All primes ≤ max(L, p_s), which includes the first s primes.
fn first_primes_and_up_to(s: usize, l: u64) -> Result<(Vec<u64>, u64)> {
    let mut limit = l.max(30);
    loop {
        let t = build_prime_tables(limit)?;
        if t.primes().len() >= s {
            return Ok((t.primes().to_vec(), limit));
        }
        limit *= 2;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SdTarget {
    /// S = {0}, k = 2
    V2,
    /// S = {0}, k = 3
    V3,
    /// S = {(1,0), (0,1)}, k = 2
    Pair,
}

impl SdTarget {
    pub fn k(&self) -> u32 {
        match self {
            SdTarget::V2 | SdTarget::Pair => 2,
            SdTarget::V3 => 3,
        }
    }

    pub fn points(&self) -> PointSet {
        match self {
            SdTarget::V2 => PointSet::origin(2),
            SdTarget::V3 => PointSet::origin(3),
            SdTarget::Pair => pair_points(),
        }
    }

    /// Scan limit used when none is given.
    pub fn default_scan_limit(&self) -> u64 {
        match self {
            SdTarget::V2 => 1_000_000,
            SdTarget::V3 => 2_000_000,
            SdTarget::Pair => 100_000,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SdTarget::V2 => "v2",
            SdTarget::V3 => "v3",
            SdTarget::Pair => "pair",
        }
    }
}

impl fmt::Display for SdTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SdTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v2" => Ok(SdTarget::V2),
            "v3" => Ok(SdTarget::V3),
            "pair" | "a" => Ok(SdTarget::Pair),
            _ => Err(Error::InvalidInput(format!(
                "unknown target {s:?}; expected v2, v3 or pair"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SDCertificate {
    pub target: SdTarget,
    pub points: String,
    pub k: u32,
    /// First L whose ratio is certified below the density.
    pub l0: u64,
    #[serde(with = "serde_q")]
    pub ratio_l0: BigRational,
    /// Enclosure of E = ratio(L0) − D.
    pub e: RigorousInterval,
    pub e_decimal: String,
    pub density: RigorousInterval,
    /// Smallest L with certified lower bound ≥ ratio(L0); the bound is
    /// monotone, so no L ≥ L1 can beat ratio(L0).
    pub l1: u64,
    pub bound_at_l1: RigorousInterval,
    /// Truncation s used by the pair bound.
    pub truncation_s: Option<u32>,
    /// Ratios were computed for every L in [1, scanned_to].
    pub scanned_to: u64,
    pub argmin: u64,
    pub count_at_argmin: String,
    #[serde(with = "serde_q")]
    pub sd_value: BigRational,
    pub sd_decimal: String,
    /// Set when scanned_to < l1: the value is then only a prefix minimum.
    pub partial: bool,
    /// L in the scanned prefix whose verdict could not be decided.
    pub undecided: Vec<u64>,
}

/// Searches the smallest L ≥ start with `ok(L)`, assuming `ok` is monotone.
fn minimal_cutoff(start: u64, ceiling: u64, ok: impl Fn(u64) -> Result<bool>) -> Result<Option<u64>> {
    if ok(start)? {
        return Ok(Some(start));
    }
    let mut lo = start;
    let mut hi = start.max(1);
    loop {
        hi = hi.saturating_mul(2);
        if hi >= ceiling {
            hi = ceiling;
            if !ok(hi)? {
                return Ok(None);
            }
            break;
        }
        if ok(hi)? {
            break;
        }
        lo = hi;
    }
    // ok(lo) false, ok(hi) true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

const CUTOFF_CEILING: u64 = 1 << 50;
/// s ≥ 3 makes Π_{i≤s}(1 + 2/pᵢ) > 4, which is what makes f(s, ·) decreasing.
const PAIR_S_RANGE: std::ops::RangeInclusive<u32> = 3..=40;
const PAIR_CUTOFF_CEILING: u64 = 1 << 20;

/// Certifies SD(V(S)) for one of the built-in targets.
///
/// Returns `CutoffInfeasible` (carrying the partial certificate) when the
/// required cutoff lies beyond the scan limit.
pub fn schnirelmann_certify(target: SdTarget, scan_limit_override: Option<u64>) -> Result<SDCertificate> {
    schnirelmann_certify_with(target, scan_limit_override, &Budget::default())
}

pub fn schnirelmann_certify_with(
    target: SdTarget,
    scan_limit_override: Option<u64>,
    budget: &Budget,
) -> Result<SDCertificate> {
    let s = target.points();
    let k = target.k();
    let limit = scan_limit_override.unwrap_or_else(|| target.default_scan_limit());
    if limit < 2 {
        return Err(Error::InvalidInput("scan limit must be at least 2".into()));
    }
    if limit > budget.max_scan {
        return Err(Error::capacity("scan limit", limit as u128, budget.max_scan as u128));
    }

    // Find L0 by scanning growing prefixes.
    let mut n = limit.min(10_000);
    let (counts, verdicts, density, l0) = loop {
        let counts = cube_counts(&s, n, budget)?;
        let (verdicts, density) = classify_all(&s, k, &counts)?;
        if let Some(l0) = (1..=n as usize).find(|&l| verdicts[l] == Verdict::Bad) {
            break (counts, verdicts, density, l0 as u64);
        }
        if n == limit {
            return Err(Error::Domain(format!(
                "no L <= {limit} has a ratio certified below the density"
            )));
        }
        n = (n * 4).min(limit);
    };
    let r0 = CubeRatio::new(counts[l0 as usize], l0, k);
    let ratio_l0 = r0.to_rational();
    let e = (&RigorousInterval::point(ratio_l0.clone()) - &density).round_out(DEFAULT_BITS);

    let beats = |bound: RigorousInterval| bound.lo() >= &ratio_l0;
    let (l1, truncation_s) = match target {
        SdTarget::V2 => (
            minimal_cutoff(l0.max(9), CUTOFF_CEILING, |l| Ok(beats(effective_lower_bound_v2(l)?)))?,
            None,
        ),
        SdTarget::V3 => (
            minimal_cutoff(l0.max(2), CUTOFF_CEILING, |l| Ok(beats(effective_lower_bound_v3(l)?)))?,
            None,
        ),
        SdTarget::Pair => {
            let table = PairBound::new(*PAIR_S_RANGE.end() as usize, PAIR_CUTOFF_CEILING)?;
            let mut best: Option<(u64, u32)> = None;
            for t in PAIR_S_RANGE {
                let ceiling = best.map_or(table.max_l(), |(l, _)| l);
                let found = minimal_cutoff(l0.max(2), ceiling, |l| Ok(beats(table.lower(t, l)?)))?;
                if let Some(l) = found {
                    if best.is_none_or(|(b, _)| l < b) {
                        best = Some((l, t));
                    }
                }
            }
            (best.map(|(l, _)| l), best.map(|(_, t)| t))
        }
    };
    let l1 = l1.ok_or_else(|| Error::Domain("effective bound never reaches ratio(L0)".into()))?;
    let bound_at_l1 = match target {
        SdTarget::V2 => effective_lower_bound_v2(l1)?,
        SdTarget::V3 => effective_lower_bound_v3(l1)?,
        SdTarget::Pair => effective_lower_bound_pair(truncation_s.expect("pair truncation"), l1)?,
    };

    let scanned_to = l1.min(limit);
    let (counts, verdicts) = if (scanned_to as usize) < counts.len() {
        (counts, verdicts)
    } else {
        let counts = cube_counts(&s, scanned_to, budget)?;
        let (verdicts, _) = classify_all(&s, k, &counts)?;
        (counts, verdicts)
    };
    let best = argmin(&counts, k, 1, scanned_to as usize);
    let sd_value = CubeRatio::new(counts[best], best as u64, k).to_rational();
    let cert = SDCertificate {
        target,
        points: s.to_string(),
        k,
        l0,
        ratio_l0,
        e_decimal: decimal(&e.lo().clone(), 15),
        e,
        density,
        l1,
        bound_at_l1,
        truncation_s,
        scanned_to,
        argmin: best as u64,
        count_at_argmin: counts[best].to_string(),
        sd_decimal: decimal(&sd_value, 15),
        sd_value,
        partial: scanned_to < l1,
        undecided: (1..=scanned_to as usize)
            .filter(|&l| verdicts[l] == Verdict::Undecided)
            .map(|l| l as u64)
            .collect(),
    };
    if cert.partial {
        return Err(Error::CutoffInfeasible {
            required: l1,
            limit,
            partial: Box::new(cert),
        });
    }
    Ok(cert)
}

/// The gap ratio(L) − D as an interval, for reporting.
pub fn ratio_gap(count: u128, l: u64, k: u32, density: &RigorousInterval) -> RigorousInterval {
    (&RigorousInterval::point(CubeRatio::new(count, l, k).to_rational()) - density).round_out(DEFAULT_BITS)
}

pub fn ratio_f64(count: u128, l: u64, k: u32) -> f64 {
    CubeRatio::new(count, l, k).to_rational().to_f64().unwrap_or(f64::NAN)
}
