//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use latvis_core::constants::{inv_zeta, zeta_cached};
use latvis_core::density::{pair_f, ratio_gap, scan_bad_visibility_with, schnirelmann_certify, SdTarget};
use latvis_core::disc::{disc_census, disc_sd_scan};
use latvis_core::ergodic::{adversarial_point, aligned_closed_form, binary_f, ergodic_average, TruncatedPoint};
use latvis_core::fracsums::{h_k, m_infinite, m_partial, verify_count_identity};
use latvis_core::rational::{decimal, ratio, round_places, truncate_places};
use latvis_core::selberg::{build_sieve_context, rigorous_upper_bound, sigma1_identity_check};
use latvis_core::visibility::{
    count_invisible_exact, count_visible_bruteforce, count_visible_cubes_origin, count_visible_sieve, s_multiplicative,
    s_of_prime,
};
use latvis_core::{Budget, Error, LatticeBox, PointSet, RigorousInterval};

/// Every tolerance used below, in one place.
mod tol {
    /// Criterion 2: open interval for ratio(820) − 6/π².
    pub const E820_RANGE: (f64, f64) = (-2.9e-5, -2.7e-5);
    /// Criterion 3: certified cutoff ceiling for SD(V₂).
    pub const V2_MAX_L1: u64 = 500_000;
    /// Criterion 4: f(10, 5000) ceiling.
    pub const PAIR_F_MAX: f64 = 0.016;
    /// Criterion 5: maximal width of the gap enclosure at L0.
    pub const V3_GAP_WIDTH: f64 = 1e-13;
    /// Criterion 6: table entries are printed to 5 places; half a unit in the
    /// last place.
    pub const TABLE_HALF_ULP: f64 = 5e-6;
    /// Criterion 12: distance from the 1/ζ(4) enclosure.
    pub const ERGODIC_DIST: f64 = 0.01;
}

struct Report {
    failures: usize,
    /// Criteria named on the command line; empty runs all.
    only: Vec<u32>,
}

impl Report {
    fn record(&mut self, id: u32, name: &str, elapsed: Duration, limit: Duration, outcome: Result<String, String>) {
        let (ok, detail) = match outcome {
            Ok(d) => (elapsed <= limit, d),
            Err(d) => (false, d),
        };
        if !ok {
            self.failures += 1;
        }
        let timing = format!("{:.2}s / {}s", elapsed.as_secs_f64(), limit.as_secs());
        let late = if elapsed > limit { " [over time budget]" } else { "" };
        println!(
            "{} criterion {id:>2} {name}: {detail} ({timing}){late}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn run(report: &mut Report, id: u32, name: &str, limit_secs: u64, f: impl FnOnce() -> Result<String, String>) {
    if !report.only.is_empty() && !report.only.contains(&id) {
        return;
    }
    let t = Instant::now();
    let outcome = f();
    report.record(id, name, t.elapsed(), Duration::from_secs(limit_secs), outcome);
}

fn check(cond: bool, msg: impl Into<String>, failures: &mut Vec<String>) {
    if !cond {
        failures.push(msg.into());
    }
}

fn verdict(passed: Vec<String>, failures: Vec<String>) -> Result<String, String> {
    if failures.is_empty() {
        Ok(passed.join("; "))
    } else {
        Err(format!("{} | observed: {}", failures.join("; "), passed.join("; ")))
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn f64_of(q: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

fn criterion_1() -> Result<String, String> {
    const EXPECTED: [u64; 18] = [
        820, 1276, 1422, 1926, 2080, 2640, 3186, 3250, 4446, 4720, 4930, 5370, 6006, 6546, 7386, 7476, 9066, 9276,
    ];
    let (rep, _) = scan_bad_visibility_with(&PointSet::origin(2), 2, 10_000, &Budget::default()).map_err(e)?;
    let extra: Vec<u64> = rep.bad.iter().copied().filter(|l| !EXPECTED.contains(l)).collect();
    let missing: Vec<u64> = EXPECTED.iter().copied().filter(|l| !rep.bad.contains(l)).collect();
    let observed = format!(
        "{} exceptional, undecided {}, unexpected {:?}, missing {:?}",
        rep.bad.len(),
        rep.undecided.len(),
        extra,
        missing
    );
    if rep.bad == EXPECTED && rep.undecided.is_empty() {
        Ok(observed)
    } else {
        Err(observed)
    }
}

fn criterion_2() -> Result<String, String> {
    let counts = count_visible_cubes_origin(2, 820).map_err(e)?;
    let gap = ratio_gap(counts[820], 820, 2, &inv_zeta(2));
    let (lo, hi) = tol::E820_RANGE;
    let observed = format!("E(820) in [{}, {}]", decimal(gap.lo(), 8), decimal(gap.hi(), 8));
    if gap.lo_f64() > lo && gap.hi_f64() < hi {
        Ok(observed)
    } else {
        Err(observed)
    }
}

fn criterion_3() -> Result<String, String> {
    let c = schnirelmann_certify(SdTarget::V2, None).map_err(e)?;
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    ok.push(format!(
        "L0 {}, argmin {}, SD {}, L1 {}",
        c.l0, c.argmin, c.sd_decimal, c.l1
    ));
    check(c.l0 == 820, "L0 != 820", &mut bad);
    check(c.argmin == 1276, "argmin != 1276", &mut bad);
    check(
        truncate_places(&c.sd_value, 5) == ratio(60787, 100_000),
        "SD does not read 0.60787...",
        &mut bad,
    );
    check(c.l1 <= tol::V2_MAX_L1, "L1 above 5e5", &mut bad);
    check(!c.partial && c.scanned_to >= c.l1, "scan did not reach L1", &mut bad);
    check(c.undecided.is_empty(), "undecided L in scan", &mut bad);
    verdict(ok, bad)
}

fn criterion_4() -> Result<String, String> {
    let c = schnirelmann_certify(SdTarget::Pair, None).map_err(e)?;
    let f = pair_f(10, 5000).map_err(e)?;
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    ok.push(format!(
        "L0 {}, argmin {}, SD {}, L1 {} (s = {:?}), f(10,5000) in [{}, {}]",
        c.l0,
        c.argmin,
        c.sd_value,
        c.l1,
        c.truncation_s,
        decimal(f.lo(), 8),
        decimal(f.hi(), 8)
    ));
    check(c.l0 == 7, "L0 != 7", &mut bad);
    check(c.argmin == 7, "argmin != 7", &mut bad);
    check(c.sd_value == ratio(15, 49), "SD != 15/49", &mut bad);
    check(!c.partial, "certificate partial", &mut bad);
    check(f.hi_f64() <= tol::PAIR_F_MAX, "f(10,5000) > 0.016", &mut bad);
    verdict(ok, bad)
}

fn criterion_5() -> Result<String, String> {
    let c = match schnirelmann_certify(SdTarget::V3, None) {
        Err(Error::CutoffInfeasible {
            partial,
            required,
            limit,
        }) => {
            let mut c = *partial;
            c.l1 = required;
            c.scanned_to = c.scanned_to.min(limit);
            c
        }
        Ok(c) => {
            return Err(format!(
                "expected CutoffInfeasible, got a full certificate with L1 {}",
                c.l1
            ))
        }
        Err(other) => return Err(other.to_string()),
    };
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    let width = f64_of(&c.e.width());
    ok.push(format!(
        "CutoffInfeasible (L1 {} > scan {}), L0 {}, gap [{}, {}] width {:.1e}, argmin {} ratio {}",
        c.l1,
        c.scanned_to,
        c.l0,
        decimal(c.e.lo(), 12),
        decimal(c.e.hi(), 12),
        width,
        c.argmin,
        decimal(&c.sd_value, 12)
    ));
    check(c.l0 == 122_760, "L0 != 122760", &mut bad);
    check(
        decimal(c.e.lo(), 6) == "-2.95313e-9" && decimal(c.e.hi(), 6) == "-2.95313e-9",
        "gap does not read -2.95313e-9",
        &mut bad,
    );
    check(width < tol::V3_GAP_WIDTH, "gap enclosure too wide", &mut bad);
    check(c.scanned_to == 2_000_000, "scan did not cover [1, 2e6]", &mut bad);
    check(c.argmin == 169_170, "argmin != 169170", &mut bad);
    check(
        round_places(&c.sd_value, 9) == ratio(831_907_366, 1_000_000_000),
        "minimum does not round to 0.831907366",
        &mut bad,
    );
    verdict(ok, bad)
}

struct TableRow {
    points: &'static str,
    k: u32,
    n: u64,
    bad: u64,
    l_min: u64,
    sd: f64,
    density: f64,
}

fn criterion_6() -> Result<String, String> {
    let rows = [
        TableRow {
            points: "(0,0),(1,0)",
            k: 2,
            n: 1000,
            bad: 307,
            l_min: 10,
            sd: 0.29000,
            density: 0.32263,
        },
        TableRow {
            points: "(0,0,0),(1,0,0)",
            k: 3,
            n: 200,
            bad: 91,
            l_min: 36,
            sd: 0.67554,
            density: 0.67689,
        },
        TableRow {
            points: "(1,1,0,0),(0,0,1,1)",
            k: 4,
            n: 200,
            bad: 90,
            l_min: 16,
            sd: 0.84634,
            density: 0.84974,
        },
    ];
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for row in &rows {
        let s: PointSet = row.points.parse().map_err(e)?;
        let (rep, _) = scan_bad_visibility_with(&s, row.k, row.n, &Budget::default()).map_err(e)?;
        let und = rep.undecided.len() as u64;
        let sd = f64_of(&rep.sd_estimate);
        ok.push(format!(
            "k={} N={}: bad {} (+{} undecided), L_min {}, SD {:.8}, D [{:.10}, {:.10}]",
            row.k,
            row.n,
            rep.bad_count,
            und,
            rep.l_min,
            sd,
            rep.density.lo_f64(),
            rep.density.hi_f64()
        ));
        let tag = format!("k={}", row.k);
        check(
            rep.bad_count <= row.bad && row.bad <= rep.bad_count + und,
            format!("{tag}: bad count {} vs expected {}", rep.bad_count, row.bad),
            &mut bad,
        );
        check(
            rep.l_min == row.l_min,
            format!("{tag}: L_min {} vs {}", rep.l_min, row.l_min),
            &mut bad,
        );
        check(
            (sd - row.sd).abs() <= tol::TABLE_HALF_ULP,
            format!("{tag}: SD vs {}", row.sd),
            &mut bad,
        );
        check(
            (rep.density.lo_f64() - row.density).abs() <= tol::TABLE_HALF_ULP
                && (rep.density.hi_f64() - row.density).abs() <= tol::TABLE_HALF_ULP,
            format!("{tag}: D vs {}", row.density),
            &mut bad,
        );
    }
    verdict(ok, bad)
}

fn criterion_7() -> Result<String, String> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (k, n, total, visible) in [(2, 9, 29, 16), (3, 4, 33, 26), (4, 1, 9, 8)] {
        let c = disc_census(k, n).map_err(e)?;
        ok.push(format!("census({k},{n}) = ({},{})", c.total, c.visible));
        check(
            (c.total, c.visible) == (total, visible),
            format!("census({k},{n})"),
            &mut bad,
        );
    }
    for (k, n, argmin) in [(2, 10_000, 9), (3, 1000, 4), (4, 100, 1)] {
        let r = disc_sd_scan(k, n).map_err(e)?;
        ok.push(format!("k={k} N={n} argmin {} ratio {}", r.argmin, r.min.ratio));
        check(r.argmin == argmin, format!("k={k} argmin"), &mut bad);
    }
    verdict(ok, bad)
}

fn random_point_set(rng: &mut ChaCha8Rng, k: usize, r: usize, spread: i64) -> PointSet {
    loop {
        let mut pts: Vec<Vec<i64>> = Vec::new();
        while pts.len() < r {
            let p: Vec<i64> = (0..k).map(|_| rng.gen_range(-spread..=spread)).collect();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let s = PointSet::new(pts).expect("distinct points");
        // S covering every class mod 2 leaves nothing visible
        if s_of_prime(&s, 2) < 1 << k {
            return s;
        }
    }
}

fn random_box(rng: &mut ChaCha8Rng, k: usize, max_volume: u64, max_side: u64) -> LatticeBox {
    loop {
        let mins: Vec<i64> = (0..k).map(|_| rng.gen_range(-60..=60)).collect();
        let lens: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=max_side)).collect();
        if lens.iter().product::<u64>() <= max_volume {
            return LatticeBox::new(mins, lens).expect("valid box");
        }
    }
}

fn criterion_8() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_slack: Option<BigRational> = None;
    for case in 0..200 {
        let k = rng.gen_range(2..=3usize);
        let r = rng.gen_range(1..=4usize);
        let s = random_point_set(&mut rng, k, r, 3);
        let side = if k == 2 { 316 } else { 46 };
        let b = random_box(&mut rng, k, 100_000, side);
        let z = rng.gen_range(1.0..=50.0f64);
        let bound = rigorous_upper_bound(&s, &b, z).map_err(|err| format!("case {case}: {err}"))?;
        let exact = count_visible_bruteforce(&s, &b).map_err(e)?;
        let exact = BigRational::from_integer(BigInt::from(exact));
        if bound.quadratic_form_value < exact {
            return Err(format!(
                "case {case}: bound {} < exact {exact} for S = {s}, B = {b}, z = {z}",
                bound.quadratic_form_value
            ));
        }
        let slack = &bound.quadratic_form_value - &exact;
        if min_slack.as_ref().is_none_or(|m| &slack < m) {
            min_slack = Some(slack);
        }
        let ctx = build_sieve_context(&s, k as u32, z).map_err(e)?;
        let sigma = sigma1_identity_check(&ctx);
        if sigma != ctx.g_z.recip() {
            return Err(format!("case {case}: sum {sigma} != 1/G(z) = {}", ctx.g_z.recip()));
        }
    }
    Ok(format!(
        "200/200 bounds hold, minimal slack {}; 200/200 exact identities",
        min_slack.map(|m| decimal(&m, 6)).unwrap_or_default()
    ))
}

fn criterion_9() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..100 {
        let k = rng.gen_range(2..=3usize);
        let r = rng.gen_range(1..=4);
        let s = random_point_set(&mut rng, k, r, 4);
        let b = random_box(&mut rng, k, 60_000, if k == 2 { 240 } else { 40 });
        let sieve = count_visible_sieve(&s, &b).map_err(e)?;
        let brute = count_visible_bruteforce(&s, &b).map_err(e)?;
        if sieve != brute {
            return Err(format!(
                "case {case}: sieve {sieve} != brute force {brute} for S = {s}, B = {b}"
            ));
        }
    }
    for (pairing, seed) in [("brute/jordan", 91u64), ("sieve/jordan", 92)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..100 {
            let k = rng.gen_range(2..=4u32);
            let l = rng.gen_range(
                1..=match k {
                    2 => 250u64,
                    3 => 40,
                    _ => 16,
                },
            );
            let jordan = count_visible_cubes_origin(k, l).map_err(e)?[l as usize];
            let b = LatticeBox::cube(k as usize, l).map_err(e)?;
            let s = PointSet::origin(k as usize);
            let other = if pairing == "brute/jordan" {
                count_visible_bruteforce(&s, &b)
            } else {
                count_visible_sieve(&s, &b)
            }
            .map_err(e)?;
            if other != BigUint::from(jordan) {
                return Err(format!("{pairing} case {case}: k={k} L={l}: {other} != {jordan}"));
            }
        }
    }
    Ok("sieve = brute force, brute force = Jordan, sieve = Jordan on 100 instances each".into())
}

fn criterion_10() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    for case in 0..500 {
        let k = rng.gen_range(2..=3usize);
        let r = rng.gen_range(1..=4);
        let s = random_point_set(&mut rng, k, r, 6);
        let b = random_box(&mut rng, k, 200_000, if k == 2 { 400 } else { 60 });
        let mut d = 1u64;
        for &p in &PRIMES {
            if rng.gen_bool(0.4) {
                d *= p;
            }
        }
        let sd = BigUint::from(s_multiplicative(&s, d).map_err(e)?);
        let floor: BigUint = b.lens().iter().map(|&l| BigUint::from(l / d)).product::<BigUint>() * &sd;
        let ceil: BigUint = b
            .lens()
            .iter()
            .map(|&l| BigUint::from(l.div_ceil(d)))
            .product::<BigUint>()
            * &sd;
        let exact = count_invisible_exact(&s, &b, d).map_err(e)?;
        if exact < floor || exact > ceil {
            return Err(format!(
                "case {case}: |I_{d}| = {exact} outside [{floor}, {ceil}] for S = {s}, B = {b}"
            ));
        }
    }
    Ok("500/500 bracketed".into())
}

fn criterion_11() -> Result<String, String> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    let m = m_partial(3, 3).map_err(e)?;
    let exact = m.value.lo() == &ratio(-1, 8) && m.value.hi() == &ratio(-1, 8);
    ok.push(format!("M(3) = [{}, {}]", m.value.lo(), m.value.hi()));
    check(exact, "M(3) is not exactly -1/8", &mut bad);

    let target = zeta_cached(2).recip().scale(&ratio(1, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut held = 0;
    for _ in 0..50 {
        let l = rng.gen_range(1..=10_000u64);
        let h = h_k(l, 3, 100_000).map_err(e)?.value;
        let mm = m_infinite(l, 3, 100_000).map_err(e)?.value;
        if (&h + &mm).overlaps(&target) {
            held += 1;
        }
    }
    ok.push(format!("h + m meets 1/(2 zeta(2)) for {held}/50 L"));
    check(held == 50, "h + m identity failed", &mut bad);

    let r = verify_count_identity(3, 2000).map_err(e)?;
    ok.push(format!(
        "max |R(L)|/(L log L) = {:.9} at L = {}",
        r.max_normalized, r.argmax
    ));
    check(
        r.max_normalized.is_finite(),
        "normalized remainder not finite",
        &mut bad,
    );
    // regression baseline from the first run
    check(
        (r.max_normalized - 0.486_999_479_491).abs() < 1e-9,
        "remainder moved off baseline",
        &mut bad,
    );
    verdict(ok, bad)
}

fn distance(a: &RigorousInterval, b: &RigorousInterval) -> f64 {
    // largest distance between a point of a and a point of b
    (a.hi_f64() - b.lo_f64()).abs().max((b.hi_f64() - a.lo_f64()).abs())
}

fn criterion_12() -> Result<String, String> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    let x = TruncatedPoint::image(&[0, 0], 10).map_err(e)?;
    let shifts = LatticeBox::new(vec![0, 0], vec![10_000, 10_000]).map_err(e)?;
    let a = ergodic_average(&x, 2, &shifts).map_err(e)?;
    let dist = distance(&a.value, &a.limit);
    ok.push(format!(
        "average in [{:.6}, {:.6}], 1/zeta(4) = {:.6}, max distance {dist:.2e}",
        a.value.lo_f64(),
        a.value.hi_f64(),
        a.limit.mid_f64()
    ));
    check(
        dist < tol::ERGODIC_DIST,
        "average not within 0.01 of 1/zeta(4)",
        &mut bad,
    );

    let x = TruncatedPoint::image(&[5, -2], 4).map_err(e)?;
    let period = 2 * 3 * 5 * 7;
    let aligned = LatticeBox::new(vec![-17, 3], vec![period, 2 * period]).map_err(e)?;
    let avg = ergodic_average(&x, 3, &aligned).map_err(e)?.truncated;
    let closed = aligned_closed_form(4, 3, 2).map_err(e)?;
    ok.push(format!("aligned average {avg}"));
    check(avg == closed, "aligned average differs from the closed form", &mut bad);

    let b = LatticeBox::new(vec![0, 0], vec![2, 2]).map_err(e)?;
    let adv = adversarial_point(2, &b).map_err(e)?;
    let mut zeros = 0;
    b.for_each_point(|n| zeros += u32::from(binary_f(&adv.shifted(n)).value == 0));
    ok.push(format!("adversarial point: binary_f = 0 on {zeros}/4 shifts"));
    check(zeros == 4, "adversarial construction", &mut bad);
    verdict(ok, bad)
}

fn criterion_13() -> Result<String, String> {
    const EXPECTED: [u64; 5] = [122_760, 169_170, 446_370, 689_130, 912_990];
    let (rep, _) = scan_bad_visibility_with(&PointSet::origin(3), 3, 1_000_000, &Budget::default()).map_err(e)?;
    let missing: Vec<u64> = EXPECTED.iter().copied().filter(|l| !rep.bad.contains(l)).collect();
    let observed = format!(
        "full list {:?}, undecided {}; 8134450 lies outside [1, 1e6], 813450 {} in the list",
        rep.bad,
        rep.undecided.len(),
        if rep.bad.contains(&813_450) { "is" } else { "is not" }
    );
    if missing.is_empty() {
        Ok(observed)
    } else {
        Err(format!("missing {missing:?}; {observed}"))
    }
}

fn main() {
    // Numeric arguments select criteria; harness flags such as --quiet are ignored.
    let only = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut report = Report { failures: 0, only };
    run(&mut report, 1, "k=2 exceptional cubes in [1,1e4]", 5, criterion_1);
    run(&mut report, 2, "E(820)", 1, criterion_2);
    run(&mut report, 3, "SD(V2) certificate", 120, criterion_3);
    run(&mut report, 4, "SD(A) certificate", 10, criterion_4);
    run(&mut report, 5, "V3 partial certificate", 600, criterion_5);
    run(&mut report, 6, "table rows", 60, criterion_6);
    run(&mut report, 7, "disc censuses and scans", 30, criterion_7);
    run(&mut report, 8, "Selberg bound soundness", 120, criterion_8);
    run(&mut report, 9, "counting oracle equivalence", 120, criterion_9);
    run(&mut report, 10, "invisible-count bracketing", 60, criterion_10);
    run(&mut report, 11, "fractional sums", 120, criterion_11);
    run(&mut report, 12, "ergodic averages", 60, criterion_12);
    run(&mut report, 13, "k=3 exceptional cubes in [1,1e6]", 300, criterion_13);
    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!(
        "{} criteria passed",
        if report.only.is_empty() { "all" } else { "selected" }
    );
}
