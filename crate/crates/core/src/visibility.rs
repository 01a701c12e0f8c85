//! Point sets, boxes, residue profiles and exact visible-point counters.
//!
//! Three independent counters are provided: a brute-force gcd test, a slab
//! sieve that marks p-invisible sublattices one hyperplane at a time, and the
//! Jordan-totient prefix-sum formula for origin cubes. They must agree
//! wherever more than one applies.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ntcore::{build_prime_tables_with, count_in_progression, factorize, jordan_prefix_sums_with};

/// Half-open box Π [Mᵢ, Mᵢ + Lᵢ).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    mins: Vec<i64>,
    lens: Vec<u64>,
}

impl LatticeBox {
    pub fn new(mins: Vec<i64>, lens: Vec<u64>) -> Result<Self> {
        if mins.is_empty() || mins.len() != lens.len() {
            return Err(Error::InvalidInput(format!(
                "box needs matching non-empty corner and side lists, got {} and {}",
                mins.len(),
                lens.len()
            )));
        }
        if let Some(i) = lens.iter().position(|&l| l == 0) {
            return Err(Error::InvalidInput(format!("box side {i} has length 0")));
        }
        for (m, l) in mins.iter().zip(&lens) {
            if (*m as i128 + *l as i128) > i64::MAX as i128 {
                return Err(Error::InvalidInput("box exceeds the i64 coordinate range".into()));
            }
        }
        Ok(LatticeBox { mins, lens })
    }

    /// The cube [1, L]^k.
    pub fn cube(k: usize, l: u64) -> Result<Self> {
        Self::new(vec![1; k], vec![l; k])
    }

    pub fn k(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[i64] {
        &self.mins
    }

    pub fn lens(&self) -> &[u64] {
        &self.lens
    }

    /// Largest coordinate in dimension i.
    pub fn max_coord(&self, i: usize) -> i64 {
        self.mins[i] + self.lens[i] as i64 - 1
    }

    pub fn volume(&self) -> BigUint {
        self.lens.iter().fold(BigUint::one(), |acc, &l| acc * l)
    }

    pub fn volume_u128(&self) -> Option<u128> {
        self.lens.iter().try_fold(1u128, |acc, &l| acc.checked_mul(l as u128))
    }

    /// Side lengths in the reporting order L₁ ≥ … ≥ L_k.
    pub fn sorted_lens(&self) -> Vec<u64> {
        let mut v = self.lens.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.k()
            && x.iter()
                .zip(self.mins.iter().zip(&self.lens))
                .all(|(&c, (&m, &l))| c >= m && (c as i128) < m as i128 + l as i128)
    }

    /// Some(L) if the box is [1, L]^k.
    pub fn as_origin_cube(&self) -> Option<u64> {
        let l = self.lens[0];
        (self.mins.iter().all(|&m| m == 1) && self.lens.iter().all(|&x| x == l)).then_some(l)
    }

    /// Visits every lattice point in row-major order.
    pub fn for_each_point(&self, mut f: impl FnMut(&[i64])) {
        let k = self.k();
        let mut x = self.mins.clone();
        loop {
            f(&x);
            let mut i = k;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                x[i] += 1;
                if x[i] <= self.max_coord(i) {
                    break;
                }
                x[i] = self.mins[i];
            }
        }
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .mins
            .iter()
            .zip(&self.lens)
            .map(|(m, l)| format!("[{},{})", m, *m as i128 + *l as i128))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for LatticeBox {
    type Err = Error;

    /// `[3,5)x[10,14)`; a closing `]` makes that side inclusive.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse box {s:?}; expected e.g. [3,5)x[10,14)"));
        let mut mins = Vec::new();
        let mut lens = Vec::new();
        for part in s.split(['x', 'X', '×']) {
            let part = part.trim();
            if !part.starts_with('[') {
                return Err(bad());
            }
            let inclusive = part.ends_with(']');
            if !inclusive && !part.ends_with(')') {
                return Err(bad());
            }
            let inner = &part[1..part.len() - 1];
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            let end = if inclusive { b as i128 + 1 } else { b as i128 };
            if end <= a as i128 {
                return Err(bad());
            }
            mins.push(a);
            lens.push((end - a as i128) as u64);
        }
        LatticeBox::new(mins, lens)
    }
}

/// A finite set S ⊂ Z^k of distinct points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointSet {
    k: usize,
    points: Vec<Vec<i64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<i64>>) -> Result<Self> {
        let k = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::InvalidInput("point set is empty".into()))?;
        if k == 0 {
            return Err(Error::InvalidInput("points need at least one coordinate".into()));
        }
        if points.iter().any(|p| p.len() != k) {
            return Err(Error::InvalidInput("points have mixed dimensions".into()));
        }
        let mut sorted = points.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("point set has repeated points".into()));
        }
        Ok(PointSet { k, points })
    }

    pub fn origin(k: usize) -> Self {
        PointSet {
            k,
            points: vec![vec![0; k]],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn is_origin(&self) -> bool {
        self.points.len() == 1 && self.points[0].iter().all(|&c| c == 0)
    }

    /// Largest |aᵢ − bᵢ| over pairs in S and coordinates. Primes above this
    /// separate every pair, so s(p) = r for them.
    pub fn diameter(&self) -> u64 {
        let mut best = 0u64;
        for i in 0..self.k {
            let lo = self.points.iter().map(|p| p[i]).min().unwrap_or(0);
            let hi = self.points.iter().map(|p| p[i]).max().unwrap_or(0);
            best = best.max((hi as i128 - lo as i128) as u64);
        }
        best
    }

    /// Largest |xᵢ − aᵢ| over x in the box, a in S and coordinates.
    pub fn spread(&self, b: &LatticeBox) -> Result<u64> {
        if b.k() != self.k {
            return Err(dim_mismatch(self.k, b.k()));
        }
        let mut best = 0i128;
        for i in 0..self.k {
            let lo = self.points.iter().map(|p| p[i]).min().unwrap_or(0) as i128;
            let hi = self.points.iter().map(|p| p[i]).max().unwrap_or(0) as i128;
            let bmin = b.mins[i] as i128;
            let bmax = b.max_coord(i) as i128;
            best = best.max((bmax - lo).abs()).max((hi - bmin).abs());
        }
        u64::try_from(best).map_err(|_| Error::capacity("coordinate spread", best as u128, u64::MAX as u128))
    }
}

fn dim_mismatch(a: usize, b: usize) -> Error {
    Error::InvalidInput(format!("dimension mismatch: point set has k = {a}, box has k = {b}"))
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .points
            .iter()
            .map(|p| {
                let c: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                format!("({})", c.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for PointSet {
    type Err = Error;

    /// `(0,0),(1,0)` or `(1,0);(0,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse point set {s:?}; expected e.g. (0,0),(1,0)"));
        let mut points = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            rest = rest.trim_start_matches([',', ';', ' ']);
            if rest.is_empty() {
                break;
            }
            if !rest.starts_with('(') {
                return Err(bad());
            }
            let close = rest.find(')').ok_or_else(bad)?;
            let coords = rest[1..close]
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<i64>>>()?;
            points.push(coords);
            rest = rest[close + 1..].trim_start();
        }
        PointSet::new(points)
    }
}

/// π_p(S): the distinct reductions of S modulo p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueProfile {
    pub p: u64,
    /// Sorted, distinct, coordinates in [0, p).
    pub residues: Vec<Vec<u64>>,
    pub s_p: usize,
}

pub fn is_visible(x: &[i64], a: &[i64]) -> bool {
    debug_assert_eq!(x.len(), a.len());
    let mut g = 0u128;
    for (xi, ai) in x.iter().zip(a) {
        let d = (*xi as i128 - *ai as i128).unsigned_abs();
        g = g.gcd(&d);
        if g == 1 {
            return true;
        }
    }
    g == 1
}

pub fn is_visible_from_all(x: &[i64], s: &PointSet) -> bool {
    s.points.iter().all(|a| is_visible(x, a))
}

pub fn residue_profile(s: &PointSet, p: u64) -> ResidueProfile {
    let mut residues: Vec<Vec<u64>> = s
        .points
        .iter()
        .map(|a| a.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
        .collect();
    residues.sort_unstable();
    residues.dedup();
    let s_p = residues.len();
    ResidueProfile { p, residues, s_p }
}

/// s(p) without materialising the residues when p exceeds the diameter.
pub fn s_of_prime(s: &PointSet, p: u64) -> usize {
    if p > s.diameter() {
        s.r()
    } else {
        residue_profile(s, p).s_p
    }
}

/// s(d) = Π_{p|d} s(p) for squarefree d; s(1) = 1.
pub fn s_multiplicative(s: &PointSet, d: u64) -> Result<u128> {
    squarefree_primes(d)?
        .into_iter()
        .try_fold(1u128, |acc, p| acc.checked_mul(s_of_prime(s, p) as u128))
        .ok_or_else(|| Error::capacity("s(d)", u128::MAX, u128::MAX))
}

pub(crate) fn squarefree_primes(d: u64) -> Result<Vec<u64>> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    let f = factorize(d);
    if f.iter().any(|&(_, e)| e > 1) {
        return Err(Error::InvalidInput(format!("{d} is not squarefree")));
    }
    Ok(f.into_iter().map(|(p, _)| p).collect())
}

/// Exact |I_d|: points of B congruent modulo every p | d to some point of S.
pub fn count_invisible_exact(s: &PointSet, b: &LatticeBox, d: u64) -> Result<BigUint> {
    count_invisible_exact_with(s, b, d, &Budget::default())
}

pub fn count_invisible_exact_with(s: &PointSet, b: &LatticeBox, d: u64, budget: &Budget) -> Result<BigUint> {
    if s.k() != b.k() {
        return Err(dim_mismatch(s.k(), b.k()));
    }
    let primes = squarefree_primes(d)?;
    let profiles: Vec<ResidueProfile> = primes.iter().map(|&p| residue_profile(s, p)).collect();
    let sd = profiles
        .iter()
        .try_fold(1u128, |acc, pr| acc.checked_mul(pr.s_p as u128))
        .unwrap_or(u128::MAX);
    if sd > budget.max_residue_vectors as u128 {
        return Err(Error::capacity(
            "CRT residue vectors",
            sd,
            budget.max_residue_vectors as u128,
        ));
    }
    let k = s.k();
    let dd = d as u128;
    // CRT basis: e_p ≡ 1 (mod p), ≡ 0 (mod d/p).
    let basis: Vec<u128> = primes
        .iter()
        .map(|&p| {
            let q = d / p;
            let inv = mod_inverse(q % p, p);
            (q as u128 * inv as u128) % dd
        })
        .collect();
    let mut idx = vec![0usize; profiles.len()];
    let mut total = BigUint::zero();
    let mut residue = vec![0u128; k];
    loop {
        residue.iter_mut().for_each(|r| *r = 0);
        for (j, pr) in profiles.iter().enumerate() {
            let v = &pr.residues[idx[j]];
            for (res, &vi) in residue.iter_mut().zip(v.iter()) {
                *res = (*res + vi as u128 * basis[j]) % dd;
            }
        }
        let mut prod = BigUint::one();
        for (i, &res) in residue.iter().enumerate() {
            let c = count_in_progression(b.mins[i], b.lens[i], res as u64, d);
            if c == 0 {
                prod = BigUint::zero();
                break;
            }
            prod *= c;
        }
        total += prod;
        // odometer over the per-prime residue choices
        let mut j = profiles.len();
        loop {
            if j == 0 {
                return Ok(total);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < profiles[j].s_p {
                break;
            }
            idx[j] = 0;
        }
    }
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "{a} is not invertible mod {m}");
    t.rem_euclid(m as i128) as u64
}

/// Exact |V(S) ∩ B| by testing every point against every a ∈ S.
pub fn count_visible_bruteforce(s: &PointSet, b: &LatticeBox) -> Result<BigUint> {
    count_visible_bruteforce_with(s, b, &Budget::default())
}

pub fn count_visible_bruteforce_with(s: &PointSet, b: &LatticeBox, budget: &Budget) -> Result<BigUint> {
    if s.k() != b.k() {
        return Err(dim_mismatch(s.k(), b.k()));
    }
    let tests = b
        .volume_u128()
        .and_then(|v| v.checked_mul(s.r() as u128))
        .unwrap_or(u128::MAX);
    if tests > budget.max_point_tests as u128 {
        return Err(Error::capacity(
            "brute-force point tests",
            tests,
            budget.max_point_tests as u128,
        ));
    }
    let mut count = 0u64;
    b.for_each_point(|x| {
        if is_visible_from_all(x, s) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Marks, for a fixed first coordinate, the (k−1)-dimensional slab of a box.
/// Residues mod p grouped as (r₀, rest).
type GroupedResidues = Vec<(u64, Vec<u64>)>;

struct SlabSieve {
    profiles: Vec<(u64, GroupedResidues)>,
    points: Vec<Vec<i64>>,
    inner_mins: Vec<i64>,
    inner_lens: Vec<u64>,
    strides: Vec<usize>,
    cells: usize,
}

impl SlabSieve {
    fn new(s: &PointSet, b: &LatticeBox, budget: &Budget) -> Result<Self> {
        let spread = s.spread(b)?;
        let inner_lens: Vec<u64> = b.lens[1..].to_vec();
        let cells_u128 = inner_lens.iter().fold(1u128, |a, &l| a.saturating_mul(l as u128));
        let threads = rayon::current_num_threads() as u128;
        budget.check_bytes("slab bit array", cells_u128.div_ceil(8).saturating_mul(threads))?;
        budget.check_bytes("sieve primes", spread as u128 * 5)?;
        let cells = cells_u128 as usize;
        let mut strides = vec![1usize; inner_lens.len()];
        for i in (0..inner_lens.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * inner_lens[i + 1] as usize;
        }
        let primes: Vec<u64> = if spread >= 2 {
            build_prime_tables_with(spread, budget)?.primes().to_vec()
        } else {
            Vec::new()
        };
        let diameter = s.diameter();
        let profiles = primes
            .iter()
            .map(|&p| {
                let mut res: Vec<(u64, Vec<u64>)> = if p > diameter {
                    s.points
                        .iter()
                        .map(|a| {
                            let v: Vec<u64> = a.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
                            (v[0], v[1..].to_vec())
                        })
                        .collect()
                } else {
                    residue_profile(s, p)
                        .residues
                        .into_iter()
                        .map(|v| (v[0], v[1..].to_vec()))
                        .collect()
                };
                res.sort_unstable();
                (p, res)
            })
            .collect();
        Ok(SlabSieve {
            profiles,
            points: s.points.clone(),
            inner_mins: b.mins[1..].to_vec(),
            inner_lens,
            strides,
            cells,
        })
    }

    fn words(&self) -> usize {
        self.cells.div_ceil(64)
    }

    /// Sets the bit of every invisible cell of slab x₁ = `x1`.
    fn mark(&self, x1: i64, bits: &mut [u64]) {
        bits.iter_mut().for_each(|w| *w = 0);
        for (p, res) in &self.profiles {
            let p = *p;
            let r0 = x1.rem_euclid(p as i64) as u64;
            let lo = res.partition_point(|(a, _)| *a < r0);
            for (a, rest) in &res[lo..] {
                if *a != r0 {
                    break;
                }
                self.mark_sublattice(p, rest, 0, 0, bits);
            }
        }
        for a in &self.points {
            if a[0] != x1 {
                continue;
            }
            let mut flat = 0usize;
            let mut inside = true;
            for i in 0..self.inner_lens.len() {
                let off = a[i + 1] as i128 - self.inner_mins[i] as i128;
                if off < 0 || off >= self.inner_lens[i] as i128 {
                    inside = false;
                    break;
                }
                flat += off as usize * self.strides[i];
            }
            if inside {
                bits[flat / 64] |= 1 << (flat % 64);
            }
        }
    }

    fn mark_sublattice(&self, p: u64, rest: &[u64], dim: usize, base: usize, bits: &mut [u64]) {
        if dim == self.inner_lens.len() {
            bits[base / 64] |= 1 << (base % 64);
            return;
        }
        let m = self.inner_mins[dim];
        let len = self.inner_lens[dim];
        let first = (rest[dim] as i128 - m as i128).rem_euclid(p as i128) as u64;
        let stride = self.strides[dim];
        if dim + 1 == self.inner_lens.len() {
            let mut off = first;
            while off < len {
                let flat = base + off as usize * stride;
                bits[flat / 64] |= 1 << (flat % 64);
                off += p;
            }
            return;
        }
        let mut off = first;
        while off < len {
            self.mark_sublattice(p, rest, dim + 1, base + off as usize * stride, bits);
            off += p;
        }
    }

    fn visible_in(&self, bits: &[u64]) -> u64 {
        self.cells as u64 - bits.iter().map(|w| w.count_ones() as u64).sum::<u64>()
    }
}

/// Exact |V(S) ∩ B| by the slab sieve.
pub fn count_visible_sieve(s: &PointSet, b: &LatticeBox) -> Result<BigUint> {
    count_visible_sieve_with(s, b, &Budget::default())
}

pub fn count_visible_sieve_with(s: &PointSet, b: &LatticeBox, budget: &Budget) -> Result<BigUint> {
    let sieve = SlabSieve::new(s, b, budget)?;
    let x0 = b.mins[0];
    let total: u128 = (0..b.lens[0])
        .into_par_iter()
        .map_init(
            || vec![0u64; sieve.words()],
            |bits, off| {
                sieve.mark(x0 + off as i64, bits);
                sieve.visible_in(bits) as u128
            },
        )
        .sum();
    Ok(BigUint::from(total))
}

/// |V(S) ∩ [1, L]^k| for every L in 1..=N, indexed by L (entry 0 is 0).
///
/// Runs the slab sieve once over [1, N]^k and buckets visible points by
/// their largest coordinate.
pub fn count_visible_cubes(s: &PointSet, n: u64) -> Result<Vec<u128>> {
    count_visible_cubes_with(s, n, &Budget::default())
}

pub fn count_visible_cubes_with(s: &PointSet, n: u64, budget: &Budget) -> Result<Vec<u128>> {
    if n == 0 {
        return Err(Error::InvalidInput("cube limit must be positive".into()));
    }
    let k = s.k();
    let b = LatticeBox::cube(k, n)?;
    let sieve = SlabSieve::new(s, &b, budget)?;
    let len = n as usize + 1;
    // 1-based max coordinate of each slab cell
    let cell_max: Vec<u32> = if k > 2 {
        budget.check_bytes("cell index", sieve.cells as u128 * 4)?;
        let mut v = vec![0u32; sieve.cells];
        for (flat, slot) in v.iter_mut().enumerate() {
            let mut rem = flat;
            let mut m = 0usize;
            for &st in &sieve.strides {
                m = m.max(rem / st);
                rem %= st;
            }
            *slot = m as u32 + 1;
        }
        v
    } else {
        Vec::new()
    };
    let by_max = (1..=n)
        .into_par_iter()
        .fold(
            || (vec![0u64; sieve.words()], vec![0u128; len]),
            |(mut bits, mut acc), x1| {
                sieve.mark(x1 as i64, &mut bits);
                for (w, word) in bits.iter().enumerate() {
                    let mut free = !word;
                    if w == bits.len() - 1 && sieve.cells % 64 != 0 {
                        free &= (1u64 << (sieve.cells % 64)) - 1;
                    }
                    while free != 0 {
                        let flat = w * 64 + free.trailing_zeros() as usize;
                        free &= free - 1;
                        let m = if k > 2 {
                            cell_max[flat] as u64
                        } else if k == 2 {
                            flat as u64 + 1
                        } else {
                            1
                        };
                        acc[m.max(x1) as usize] += 1;
                    }
                }
                (bits, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(
            || vec![0u128; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut counts = vec![0u128; len];
    let mut run = 0u128;
    for l in 1..len {
        run += by_max[l];
        counts[l] = run;
    }
    Ok(counts)
}

/// |V_k ∩ [1, L]^k| from the origin for L in 1..=N via
/// Σ_{m≤L} Σ_{j=1}^{k} (−1)^{j−1} C(k, j) J_{k−j}(m). Entry 0 is 0.
pub fn count_visible_cubes_origin(k: u32, n: u64) -> Result<Vec<u128>> {
    count_visible_cubes_origin_with(k, n, &Budget::default())
}

pub fn count_visible_cubes_origin_with(k: u32, n: u64, budget: &Budget) -> Result<Vec<u128>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("dimension k must be >= 2, got {k}")));
    }
    // counts reach N^k
    let top = (n as u128).checked_pow(k);
    if top.is_none() {
        return Err(Error::capacity("cube count", u128::MAX, u128::MAX));
    }
    let tables = jordan_prefix_sums_with(k, n, budget)?;
    let mut binom = vec![1u128; k as usize + 1];
    for j in 1..=k as usize {
        binom[j] = binom[j - 1] * (k as u128 - j as u128 + 1) / j as u128;
    }
    let mut out = vec![0u128; n as usize + 1];
    for l in 1..=n {
        let mut pos = 0u128;
        let mut neg = 0u128;
        for j in 1..=k {
            let term = binom[j as usize] * tables.prefix_u128(k - j, l);
            if j % 2 == 1 {
                pos += term;
            } else {
                neg += term;
            }
        }
        out[l as usize] = pos - neg;
    }
    Ok(out)
}

/// Counting strategy for [`count_visible`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Auto,
    Brute,
    Sieve,
    Jordan,
}

impl FromStr for CountMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(CountMethod::Auto),
            "brute" => Ok(CountMethod::Brute),
            "sieve" => Ok(CountMethod::Sieve),
            "jordan" => Ok(CountMethod::Jordan),
            _ => Err(Error::InvalidInput(format!("unknown count method {s:?}"))),
        }
    }
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CountMethod::Auto => "auto",
            CountMethod::Brute => "brute",
            CountMethod::Sieve => "sieve",
            CountMethod::Jordan => "jordan",
        };
        f.write_str(s)
    }
}

/// Dispatches to one counter. `Auto` uses the Jordan formula for origin
/// cubes and the slab sieve otherwise.
pub fn count_visible(s: &PointSet, b: &LatticeBox, method: CountMethod, budget: &Budget) -> Result<BigUint> {
    if s.k() != b.k() {
        return Err(dim_mismatch(s.k(), b.k()));
    }
    let origin_cube = s.is_origin().then(|| b.as_origin_cube()).flatten();
    match method {
        CountMethod::Brute => count_visible_bruteforce_with(s, b, budget),
        CountMethod::Sieve => count_visible_sieve_with(s, b, budget),
        CountMethod::Jordan => {
            let l = origin_cube
                .ok_or_else(|| Error::InvalidInput("the jordan method needs S = {0} and a box [1,L]^k".into()))?;
            let counts = count_visible_cubes_origin_with(s.k() as u32, l, budget)?;
            Ok(BigUint::from(counts[l as usize]))
        }
        CountMethod::Auto => match origin_cube {
            Some(l) if s.k() >= 2 => {
                let counts = count_visible_cubes_origin_with(s.k() as u32, l, budget)?;
                Ok(BigUint::from(counts[l as usize]))
            }
            _ => count_visible_sieve_with(s, b, budget),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcore::jordan_totient;
    use proptest::prelude::*;

    fn ps(s: &str) -> PointSet {
        s.parse().unwrap()
    }

    #[test]
    fn visibility_examples() {
        assert!(is_visible(&[3, 4], &[0, 0]));
        assert!(!is_visible(&[2, 4], &[0, 0]));
        assert!(!is_visible(&[5, 5], &[5, 5]));
        assert!(is_visible(&[-1, 7], &[0, 0]));
    }

    #[test]
    fn parsing() {
        assert_eq!(ps("(0,0),(1,0)").points(), &[vec![0, 0], vec![1, 0]]);
        assert_eq!(ps("(1,0);(0,1)").points(), &[vec![1, 0], vec![0, 1]]);
        assert_eq!(ps(" ( -2 , 3 ) ").points(), &[vec![-2, 3]]);
        assert!("(0,0),(0,0)".parse::<PointSet>().is_err());
        assert!("(0,0),(1)".parse::<PointSet>().is_err());
        assert!("".parse::<PointSet>().is_err());
        let b: LatticeBox = "[3,5)x[10,14)".parse().unwrap();
        assert_eq!(b.mins(), &[3, 10]);
        assert_eq!(b.lens(), &[2, 4]);
        let c: LatticeBox = "[1,6]x[1,6]".parse().unwrap();
        assert_eq!(c, LatticeBox::cube(2, 6).unwrap());
        assert_eq!(c.to_string(), "[1,7)x[1,7)");
        assert!("[3,3)".parse::<LatticeBox>().is_err());
        assert_eq!(
            LatticeBox::new(vec![0, 0, 0], vec![5, 9, 2]).unwrap().sorted_lens(),
            vec![9, 5, 2]
        );
    }

    #[test]
    fn residue_profiles() {
        assert_eq!(residue_profile(&ps("(0,0)"), 5).s_p, 1);
        assert_eq!(residue_profile(&ps("(0,0),(2,2)"), 2).s_p, 1);
        assert_eq!(residue_profile(&ps("(1,0),(0,1)"), 2).s_p, 2);
        assert_eq!(residue_profile(&ps("(-1,0)"), 3).residues, vec![vec![2, 0]]);
    }

    #[test]
    fn s_of_d() {
        assert_eq!(s_multiplicative(&ps("(0,0),(1,0)"), 1).unwrap(), 1);
        assert_eq!(s_multiplicative(&ps("(0,0),(1,0)"), 6).unwrap(), 4);
        assert_eq!(s_multiplicative(&ps("(0,0),(2,2)"), 2).unwrap(), 1);
        assert!(s_multiplicative(&ps("(0,0)"), 12).is_err());
    }

    #[test]
    fn invisible_examples() {
        let b = LatticeBox::cube(2, 6).unwrap();
        assert_eq!(count_invisible_exact(&ps("(0,0)"), &b, 2).unwrap(), BigUint::from(9u32));
        assert_eq!(
            count_invisible_exact(&ps("(0,0)"), &b, 1).unwrap(),
            BigUint::from(36u32)
        );
        let b7 = LatticeBox::cube(2, 7).unwrap();
        let s = ps("(1,0),(0,1)");
        let mut brute = 0u32;
        b7.for_each_point(|x| {
            if s.points()
                .iter()
                .any(|a| (x[0] - a[0]) % 2 == 0 && (x[1] - a[1]) % 2 == 0)
            {
                brute += 1;
            }
        });
        assert_eq!(count_invisible_exact(&s, &b7, 2).unwrap(), BigUint::from(brute));
    }

    #[test]
    fn brute_examples() {
        let o = PointSet::origin(2);
        assert_eq!(
            count_visible_bruteforce(&o, &LatticeBox::cube(2, 4).unwrap()).unwrap(),
            BigUint::from(11u32)
        );
        assert_eq!(
            count_visible_bruteforce(&ps("(1,0);(0,1)"), &LatticeBox::cube(2, 7).unwrap()).unwrap(),
            BigUint::from(15u32)
        );
        for k in 1..=4 {
            assert_eq!(
                count_visible_bruteforce(&PointSet::origin(k), &LatticeBox::cube(k, 1).unwrap()).unwrap(),
                BigUint::one()
            );
        }
    }

    #[test]
    fn brute_respects_budget() {
        let b = Budget {
            max_point_tests: 10,
            ..Budget::default()
        };
        let r = count_visible_bruteforce_with(&PointSet::origin(2), &LatticeBox::cube(2, 4).unwrap(), &b);
        assert!(matches!(r, Err(Error::Capacity { .. })));
    }

    #[test]
    fn sieve_small_cases() {
        let o = PointSet::origin(3);
        let b = LatticeBox::cube(3, 10).unwrap();
        let counts = count_visible_cubes_origin(3, 10).unwrap();
        assert_eq!(count_visible_sieve(&o, &b).unwrap(), BigUint::from(counts[10]));
        let b = LatticeBox::new(vec![-3, 4], vec![7, 5]).unwrap();
        let s = ps("(0,0),(1,0)");
        assert_eq!(
            count_visible_sieve(&s, &b).unwrap(),
            count_visible_bruteforce(&s, &b).unwrap()
        );
    }

    #[test]
    fn origin_cube_counts() {
        let c = count_visible_cubes_origin(2, 820).unwrap();
        assert_eq!(c[4], 11);
        // 2Φ(L) − 1
        let mut phi = 0u128;
        for l in 1..=820u64 {
            phi += (1..=l).filter(|&m| m.gcd(&l) == 1).count() as u128;
            assert_eq!(c[l as usize], 2 * phi - 1);
        }
        let c3 = count_visible_cubes_origin(3, 50).unwrap();
        for l in 1..=50u64 {
            let b = LatticeBox::cube(3, l).unwrap();
            assert_eq!(
                BigUint::from(c3[l as usize]),
                count_visible_bruteforce(&PointSet::origin(3), &b).unwrap()
            );
        }
    }

    #[test]
    fn cube_counts_general_match_sieve() {
        for (s, n) in [
            ("(0,0),(1,0)", 40u64),
            ("(0,0,0),(1,0,0)", 12),
            ("(1,1,0,0),(0,0,1,1)", 6),
            ("(0,0)", 30),
        ] {
            let s = ps(s);
            let counts = count_visible_cubes(&s, n).unwrap();
            for l in 1..=n {
                let b = LatticeBox::cube(s.k(), l).unwrap();
                assert_eq!(
                    BigUint::from(counts[l as usize]),
                    count_visible_bruteforce(&s, &b).unwrap(),
                    "L = {l}"
                );
            }
        }
    }

    #[test]
    fn shell_identity() {
        for k in [2usize, 3] {
            let o = PointSet::origin(k);
            for m in 1..=if k == 2 { 100 } else { 40 } {
                // points of [1,m]^k with x_1 = m
                let mut mins = vec![1i64; k];
                let mut lens = vec![m as u64; k];
                mins[0] = m;
                lens[0] = 1;
                let b = LatticeBox::new(mins, lens).unwrap();
                let c = count_visible_bruteforce(&o, &b).unwrap();
                assert_eq!(c, jordan_totient(k as u32 - 1, m as u64), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn box_with_no_visible_points() {
        // x ≡ 0 (2), −1 (3), 0 (5), −1 (7); y ≡ 0 (2), 0 (3), −1 (5), −1 (7)
        let crt = |res: [i64; 4]| {
            (0..210i64)
                .find(|x| [2, 3, 5, 7].iter().zip(res).all(|(p, r)| (x - r).rem_euclid(*p) == 0))
                .unwrap()
        };
        let x = crt([0, -1, 0, -1]);
        let y = crt([0, 0, -1, -1]);
        let b = LatticeBox::new(vec![x, y], vec![2, 2]).unwrap();
        assert!(b.volume() >= BigUint::from(4u32));
        assert_eq!(
            count_visible_bruteforce(&PointSet::origin(2), &b).unwrap(),
            BigUint::zero()
        );
        assert_eq!(count_visible_sieve(&PointSet::origin(2), &b).unwrap(), BigUint::zero());
    }

    #[test]
    fn inclusion_exclusion_closes() {
        let s = ps("(0,0),(1,2)");
        let b = LatticeBox::new(vec![-2, 1], vec![8, 6]).unwrap();
        let spread = s.spread(&b).unwrap();
        let primes: Vec<u64> = (2..=spread)
            .filter(|&n| factorize(n).len() == 1 && factorize(n)[0].1 == 1)
            .collect();
        let mut total = num_bigint::BigInt::zero();
        for mask in 0u32..(1 << primes.len()) {
            let d: u64 = primes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| p)
                .product();
            let c = num_bigint::BigInt::from(count_invisible_exact(&s, &b, d).unwrap());
            if mask.count_ones() % 2 == 0 {
                total += c;
            } else {
                total -= c;
            }
        }
        assert_eq!(
            total,
            num_bigint::BigInt::from(count_visible_bruteforce(&s, &b).unwrap())
        );
    }

    #[test]
    fn method_dispatch() {
        let o = PointSet::origin(2);
        let b = LatticeBox::cube(2, 30).unwrap();
        let budget = Budget::default();
        let expected = count_visible_bruteforce(&o, &b).unwrap();
        for m in [
            CountMethod::Auto,
            CountMethod::Brute,
            CountMethod::Sieve,
            CountMethod::Jordan,
        ] {
            assert_eq!(count_visible(&o, &b, m, &budget).unwrap(), expected);
        }
        let off = LatticeBox::new(vec![2, 1], vec![30, 30]).unwrap();
        assert!(count_visible(&o, &off, CountMethod::Jordan, &budget).is_err());
    }

    fn arb_instance() -> impl Strategy<Value = (PointSet, LatticeBox)> {
        (2usize..=3).prop_flat_map(|k| {
            (
                prop::collection::btree_set(prop::collection::vec(-6i64..6, k), 1..=4),
                prop::collection::vec(-10i64..10, k),
                prop::collection::vec(1u64..=if k == 2 { 30 } else { 10 }, k),
            )
                .prop_map(|(pts, mins, lens)| {
                    (
                        PointSet::new(pts.into_iter().collect()).unwrap(),
                        LatticeBox::new(mins, lens).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sieve_matches_brute((s, b) in arb_instance()) {
            prop_assert_eq!(count_visible_sieve(&s, &b).unwrap(), count_visible_bruteforce(&s, &b).unwrap());
        }

        #[test]
        fn bracketing_holds((s, b) in arb_instance(), d in prop::sample::select(vec![1u64, 2, 3, 5, 6, 7, 10, 15, 30, 42])) {
            let exact = count_invisible_exact(&s, &b, d).unwrap();
            let sd = s_multiplicative(&s, d).unwrap();
            let floor: BigUint = b.lens().iter().fold(BigUint::from(sd), |a, &l| a * (l / d));
            let ceil: BigUint = b.lens().iter().fold(BigUint::from(sd), |a, &l| a * l.div_ceil(d));
            prop_assert!(floor <= exact && exact <= ceil);
        }
    }
}
