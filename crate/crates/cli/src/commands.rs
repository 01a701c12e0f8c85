use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use latvis_core::budget::parse_bytes;
use latvis_core::constants::inv_zeta;
use latvis_core::density::{scan_bad_visibility_with, schnirelmann_certify_with, CubeRatio};
use latvis_core::disc::{disc_census_with, disc_exceptional_scan_with, disc_sd_scan_with};
use latvis_core::ergodic::{adversarial_point_with, binary_average, binary_f, ergodic_average_with, TruncatedPoint};
use latvis_core::fracsums::{
    h_k_with, m_infinite_with, m_partial_with, sign_witnesses_with, verify_count_identity_with,
};
use latvis_core::rational::{decimal, rational_string};
use latvis_core::selberg::{default_z, density_enclosure, rigorous_upper_bound_with};
use latvis_core::visibility::count_visible;
use latvis_core::{Budget, CountMethod, Error as CoreError, LatticeBox, PointSet, RigorousInterval, SdTarget};

use crate::config::RunConfig;
use crate::output::{emit, Format, Report};

/// Smallest sieve level the command line accepts; lower values are raised.
const MIN_CLI_Z: f64 = 3.0;
const DEFAULT_MSUM_P: u64 = 1_000_000;

fn budget(c: &RunConfig) -> Result<Budget> {
    let mut b = Budget::from_env()?;
    if let Some(raw) = &c.mem_budget {
        b.max_bytes = parse_bytes(raw)?;
    }
    Ok(b)
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(CoreError::InvalidInput(msg.into()))
}

fn q_json(q: &BigRational) -> Value {
    json!({ "value": rational_string(q), "decimal": decimal(q, 15) })
}

/// S and k, with k inferred from S and S defaulting to the origin.
fn points_and_k(c: &RunConfig) -> Result<(PointSet, u32)> {
    match (&c.points, c.k) {
        (Some(raw), k) => {
            let s: PointSet = raw.parse()?;
            if let Some(k) = k {
                if k as usize != s.k() {
                    return Err(usage(format!("k = {k} but S has dimension {}", s.k())));
                }
            }
            Ok((s.clone(), s.k() as u32))
        }
        (None, k) => {
            let k = k.unwrap_or(2);
            Ok((PointSet::origin(k as usize), k))
        }
    }
}

fn lattice_box(c: &RunConfig, k: u32) -> Result<LatticeBox> {
    match (c.cube, &c.box_spec) {
        (Some(l), None) => Ok(LatticeBox::cube(k as usize, l)?),
        (None, Some(raw)) => {
            let b: LatticeBox = raw.parse()?;
            if b.k() != k as usize {
                return Err(usage(format!("box has dimension {}, expected {k}", b.k())));
            }
            Ok(b)
        }
        (Some(_), Some(_)) => Err(usage("give either --cube or --box, not both")),
        (None, None) => Err(usage("a box is required: --cube L or --box \"[a,b)x[c,d)\"")),
    }
}

fn density_of(s: &PointSet, k: u32) -> Result<Option<RigorousInterval>> {
    if s.is_origin() {
        return Ok(Some(inv_zeta(k)));
    }
    match density_enclosure(s, k) {
        Ok(d) => Ok(Some(d)),
        Err(CoreError::DegenerateDensity { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run(c: &RunConfig) -> Result<u8> {
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let budget = budget(c)?;
    let (report, code) = match c.command.as_str() {
        "count" => (count(c, &budget)?, 0),
        "bound" => (bound(c, &budget)?, 0),
        "sd" => sd(c, &budget)?,
        "scan" => (scan(c, &budget)?, 0),
        "disc" => (disc(c, &budget)?, 0),
        "ergodic" => (ergodic(c, &budget)?, 0),
        "msum" => (msum(c, &budget)?, 0),
        "tables" => (tables(c, &budget)?, 0),
        other => bail!(usage(format!("unknown command {other:?}"))),
    };
    emit(&report, c.output.as_deref())?;
    Ok(code)
}

fn count(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let (s, k) = points_and_k(c)?;
    let b = lattice_box(c, k)?;
    let method: CountMethod = c.method.as_deref().unwrap_or("auto").parse()?;
    let start = Instant::now();
    let n = count_visible(&s, &b, method, budget)?;
    eprintln!("count: method {method}, {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
    let volume = b.volume();
    let ratio = BigRational::new(BigInt::from(n.clone()), BigInt::from(volume.clone()));
    let density = density_of(&s, k)?;
    let fmt = Format::parse(c.format.as_deref(), Format::Json)?;
    Ok(match fmt {
        Format::Json => Report::Json(json!({
            "points": s.to_string(),
            "k": k,
            "box": b.to_string(),
            "method": method.to_string(),
            "count": n.to_string(),
            "volume": volume.to_string(),
            "ratio": rational_string(&ratio),
            "ratio_decimal": decimal(&ratio, 15),
            "density": density,
        })),
        Format::Csv => Report::Csv {
            header: vec!["points", "k", "box", "count", "volume", "ratio", "ratio_decimal"],
            rows: vec![vec![
                s.to_string(),
                k.to_string(),
                b.to_string(),
                n.to_string(),
                volume.to_string(),
                rational_string(&ratio),
                decimal(&ratio, 15),
            ]],
        },
    })
}

fn bound(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let (s, k) = points_and_k(c)?;
    let b = lattice_box(c, k)?;
    let z = match c.z.as_deref().unwrap_or("auto") {
        "auto" => default_z(&b, k),
        raw => {
            let z: f64 = raw
                .parse()
                .map_err(|_| usage(format!("z must be a number or auto, got {raw:?}")))?;
            if !(z.is_finite()) {
                return Err(usage("z must be finite"));
            }
            if z < MIN_CLI_Z {
                eprintln!("warning: z = {z} is below {MIN_CLI_Z}; using {MIN_CLI_Z}");
                MIN_CLI_Z
            } else {
                z
            }
        }
    };
    let bound = rigorous_upper_bound_with(&s, &b, z, budget)?;
    let exact = match count_visible(&s, &b, CountMethod::Auto, budget) {
        Ok(n) => Some(BigRational::from_integer(BigInt::from(n))),
        Err(CoreError::Capacity { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let slack = exact.as_ref().map(|e| &bound.quadratic_form_value - e);
    Ok(Report::Json(json!({
        "points": s.to_string(),
        "k": k,
        "box": b.to_string(),
        "z": z,
        "bound": q_json(&bound.quadratic_form_value),
        "detail": bound,
        "exact": exact.as_ref().map(|e| e.to_integer().to_string()),
        "slack": slack.as_ref().map(q_json),
    })))
}

fn sd(c: &RunConfig, budget: &Budget) -> Result<(Report, u8)> {
    let target: SdTarget = c
        .target
        .as_deref()
        .ok_or_else(|| usage("--target is required"))?
        .parse()?;
    match schnirelmann_certify_with(target, c.scan_limit, budget) {
        Ok(cert) => Ok((Report::Json(serde_json::to_value(&cert)?), 0)),
        Err(CoreError::CutoffInfeasible {
            required,
            limit,
            partial,
        }) => {
            eprintln!("partial: certification needs L1 = {required}, scan limit is {limit}");
            let mut v = serde_json::to_value(&*partial)?;
            v["partial"] = json!(true);
            v["required_l1"] = json!(required);
            v["scan_limit"] = json!(limit);
            Ok((Report::Json(v), 3))
        }
        Err(e) => Err(e.into()),
    }
}

fn scan(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let (s, k) = points_and_k(c)?;
    let n = c.n.ok_or_else(|| usage("--N is required"))?;
    let (report, rows) = scan_bad_visibility_with(&s, k, n, budget)?;
    eprintln!(
        "scan: bad_count {} good_count {} undecided {} L_min {} sd {} ({})",
        report.bad_count,
        report.good_count,
        report.undecided.len(),
        report.l_min,
        rational_string(&report.sd_estimate),
        report.sd_decimal
    );
    Ok(match Format::parse(c.format.as_deref(), Format::Csv)? {
        Format::Json => Report::Json(json!({ "report": report, "rows": rows })),
        Format::Csv => Report::Csv {
            header: vec!["L", "count", "ratio_num", "ratio_den", "verdict"],
            rows: rows
                .iter()
                .map(|r| {
                    let q = CubeRatio::new(r.count, r.l, k).to_rational();
                    vec![
                        r.l.to_string(),
                        r.count.to_string(),
                        q.numer().to_string(),
                        q.denom().to_string(),
                        r.verdict.to_string(),
                    ]
                })
                .collect(),
        },
    })
}

fn disc(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let k = c.k.unwrap_or(2);
    let n = c.n.ok_or_else(|| usage("--N is required"))?;
    match c.mode.as_deref().unwrap_or("scan") {
        "census" => Ok(Report::Json(serde_json::to_value(disc_census_with(k, n, budget)?)?)),
        "sd" => Ok(Report::Json(serde_json::to_value(disc_sd_scan_with(k, n, budget)?)?)),
        "scan" => {
            let (report, rows) = disc_exceptional_scan_with(k, n, budget)?;
            eprintln!(
                "disc: {} exceptional of {n} ({}), undecided {}",
                report.exceptional.len(),
                report.fraction_decimal,
                report.undecided.len()
            );
            Ok(match Format::parse(c.format.as_deref(), Format::Csv)? {
                Format::Json => Report::Json(json!({ "report": report, "rows": rows })),
                Format::Csv => Report::Csv {
                    header: vec!["n", "total", "visible", "verdict"],
                    rows: rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.n.to_string(),
                                r.total.to_string(),
                                r.visible.to_string(),
                                r.verdict.to_string(),
                            ]
                        })
                        .collect(),
                },
            })
        }
        other => Err(usage(format!(
            "unknown disc mode {other:?}; expected census, sd or scan"
        ))),
    }
}

fn parse_int_point(raw: &str) -> Result<Vec<i64>> {
    let inner = raw.trim().trim_start_matches('(').trim_end_matches(')');
    inner
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| usage(format!("bad point {raw:?}"))))
        .collect()
}

fn shift_box(c: &RunConfig, k: u32) -> Result<LatticeBox> {
    match (c.side, &c.box_spec) {
        (Some(l), None) => Ok(LatticeBox::new(vec![0; k as usize], vec![l; k as usize])?),
        (None, Some(raw)) => {
            let b: LatticeBox = raw.parse()?;
            if b.k() != k as usize {
                return Err(usage(format!("box has dimension {}, expected {k}", b.k())));
            }
            Ok(b)
        }
        (Some(_), Some(_)) => Err(usage("give either --side or --box, not both")),
        (None, None) => Err(usage("a shift box is required: --side L or --box")),
    }
}

fn t_values(c: &RunConfig) -> Result<Vec<usize>> {
    c.t.as_deref()
        .unwrap_or("10")
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("bad T list {:?}", c.t)))
        })
        .collect()
}

fn ergodic(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let point = match &c.point {
        Some(raw) => parse_int_point(raw)?,
        None => vec![0; c.k.unwrap_or(2) as usize],
    };
    let k = point.len() as u32;
    if c.k.is_some_and(|kk| kk != k) {
        return Err(usage(format!(
            "k = {} but the point has dimension {k}",
            c.k.unwrap_or(0)
        )));
    }
    let shifts = shift_box(c, k)?;
    let s = c.s.unwrap_or(2);
    match c.mode.as_deref().unwrap_or("average") {
        "average" => {
            let mut rows = Vec::new();
            let mut docs = Vec::new();
            for t in t_values(c)? {
                let x = TruncatedPoint::image(&point, t)?;
                let a = ergodic_average_with(&x, s, &shifts, budget)?;
                rows.push(vec![
                    t.to_string(),
                    shifts.to_string(),
                    rational_string(a.value.lo()),
                    rational_string(a.value.hi()),
                    decimal(a.value.lo(), 15),
                    decimal(a.value.hi(), 15),
                    decimal(a.limit.lo(), 15),
                ]);
                docs.push(serde_json::to_value(&a)?);
            }
            Ok(match Format::parse(c.format.as_deref(), Format::Csv)? {
                Format::Json => Report::Json(Value::Array(docs)),
                Format::Csv => Report::Csv {
                    header: vec![
                        "T",
                        "box",
                        "value_lo",
                        "value_hi",
                        "value_lo_decimal",
                        "value_hi_decimal",
                        "limit",
                    ],
                    rows,
                },
            })
        }
        "binary" => {
            let mut rows = Vec::new();
            for t in t_values(c)? {
                let x = TruncatedPoint::image(&point, t)?;
                let avg = binary_average(&x, &shifts)?;
                rows.push(vec![
                    t.to_string(),
                    shifts.to_string(),
                    rational_string(&avg),
                    decimal(&avg, 15),
                ]);
            }
            Ok(Report::Csv {
                header: vec!["T", "box", "binary_average", "binary_average_decimal"],
                rows,
            })
        }
        "adversarial" => {
            let x = adversarial_point_with(k as usize, &shifts, budget)?;
            let mut zeros = 0u64;
            shifts.for_each_point(|n| zeros += u64::from(binary_f(&x.shifted(n)).value == 0));
            let avg = binary_average(&x, &shifts)?;
            Ok(Report::Json(json!({
                "k": k,
                "box": shifts.to_string(),
                "t": x.t(),
                "largest_prime": x.primes().last(),
                "shifts_with_f_zero": zeros,
                "binary_average": q_json(&avg),
                "inverse_zeta_k": inv_zeta(k),
            })))
        }
        other => Err(usage(format!(
            "unknown ergodic mode {other:?}; expected average, binary or adversarial"
        ))),
    }
}

fn msum(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let k = c.k.unwrap_or(3);
    let need_l = || c.l.ok_or_else(|| usage("--L is required"));
    let need_n = || c.n.ok_or_else(|| usage("--N is required"));
    let v = match c.mode.as_deref().unwrap_or("partial") {
        "partial" => {
            let v = m_partial_with(need_l()?, k, budget)?;
            if v.diagnostic {
                eprintln!("note: k = 2 is a diagnostic; the sign results concern k >= 3");
            }
            serde_json::to_value(v)?
        }
        "infinite" => {
            let l = need_l()?;
            serde_json::to_value(m_infinite_with(l, k, c.p.unwrap_or(DEFAULT_MSUM_P.max(l)), budget)?)?
        }
        "h" => {
            let l = need_l()?;
            serde_json::to_value(h_k_with(l, k, c.p.unwrap_or(DEFAULT_MSUM_P.max(l)), budget)?)?
        }
        "identity" => serde_json::to_value(verify_count_identity_with(k, need_n()?, budget)?)?,
        "witnesses" => serde_json::to_value(sign_witnesses_with(k, need_n()?, budget)?)?,
        other => return Err(usage(format!("unknown msum mode {other:?}"))),
    };
    Ok(Report::Json(v))
}

struct TableSpec {
    id: &'static str,
    points: &'static str,
    n: u64,
}

const TABLES: [TableSpec; 3] = [
    TableSpec {
        id: "1",
        points: "(0,0),(1,0)",
        n: 1000,
    },
    TableSpec {
        id: "2",
        points: "(0,0,0),(1,0,0)",
        n: 200,
    },
    TableSpec {
        id: "3",
        points: "(1,1,0,0),(0,0,1,1)",
        n: 200,
    },
];

fn tables(c: &RunConfig, budget: &Budget) -> Result<Report> {
    let which = c.table.as_deref().unwrap_or("all");
    let selected: Vec<&TableSpec> = TABLES.iter().filter(|t| which == "all" || which == t.id).collect();
    if selected.is_empty() {
        return Err(usage(format!("unknown table {which:?}; expected 1, 2, 3 or all")));
    }
    let mut rows = Vec::new();
    for t in selected {
        let s: PointSet = t.points.parse()?;
        let k = s.k() as u32;
        let n = c.n.unwrap_or(t.n);
        let (rep, _) = scan_bad_visibility_with(&s, k, n, budget)?;
        rows.push(vec![
            t.id.to_string(),
            t.points.to_string(),
            k.to_string(),
            n.to_string(),
            rep.bad_count.to_string(),
            rep.undecided.len().to_string(),
            rep.l_min.to_string(),
            rational_string(&rep.sd_estimate),
            rep.sd_decimal.clone(),
            decimal(rep.density.lo(), 15),
            decimal(rep.density.hi(), 15),
        ]);
    }
    Ok(Report::Csv {
        header: vec![
            "table",
            "points",
            "k",
            "N",
            "bad_count",
            "undecided",
            "L_min",
            "sd",
            "sd_decimal",
            "density_lo",
            "density_hi",
        ],
        rows,
    })
}
