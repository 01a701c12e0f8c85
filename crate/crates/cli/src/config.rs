//! Run configuration: command-line flags merged over a flat `key = value`
//! file, merged over defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Every setting a subcommand may read. `None` means "not given"; defaults
/// are applied where the value is used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub points: Option<String>,
    pub k: Option<u32>,
    pub cube: Option<u64>,
    #[serde(rename = "box")]
    pub box_spec: Option<String>,
    pub side: Option<u64>,
    pub n: Option<u64>,
    pub l: Option<u64>,
    pub z: Option<String>,
    pub p: Option<u64>,
    pub t: Option<String>,
    pub s: Option<u32>,
    pub method: Option<String>,
    pub target: Option<String>,
    pub mode: Option<String>,
    pub point: Option<String>,
    pub table: Option<String>,
    pub scan_limit: Option<u64>,
    pub format: Option<String>,
    pub output: Option<String>,
    pub threads: Option<usize>,
    pub mem_budget: Option<String>,
}

const KEYS: [&str; 22] = [
    "command",
    "points",
    "k",
    "cube",
    "box",
    "side",
    "n",
    "l",
    "z",
    "p",
    "t",
    "s",
    "method",
    "target",
    "mode",
    "point",
    "table",
    "scan_limit",
    "format",
    "output",
    "threads",
    "mem_budget",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .replace('_', "")
        .parse()
        .map_err(|_| anyhow::anyhow!("config key {key}: {v:?} is not a valid number"))
}

impl RunConfig {
    /// Parses the flat format: one `key = value` per line, `#` starts a
    /// comment line, blank lines are ignored.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key = value, got {raw:?}", i + 1);
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            c.set(&key, value).with_context(|| format!("config line {}", i + 1))?;
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_kv(&text)
    }

    fn set(&mut self, key: &str, v: String) -> Result<()> {
        match key {
            "command" => self.command = v,
            "points" | "s_points" => self.points = Some(v),
            "k" => self.k = Some(parse_num(key, &v)?),
            "cube" => self.cube = Some(parse_num(key, &v)?),
            "box" => self.box_spec = Some(v),
            "side" => self.side = Some(parse_num(key, &v)?),
            "n" => self.n = Some(parse_num(key, &v)?),
            "l" => self.l = Some(parse_num(key, &v)?),
            "z" => self.z = Some(v),
            "p" => self.p = Some(parse_num(key, &v)?),
            "t" => self.t = Some(v),
            "s" => self.s = Some(parse_num(key, &v)?),
            "method" => self.method = Some(v),
            "target" => self.target = Some(v),
            "mode" => self.mode = Some(v),
            "point" => self.point = Some(v),
            "table" => self.table = Some(v),
            "scan_limit" => self.scan_limit = Some(parse_num(key, &v)?),
            "format" => self.format = Some(v),
            "output" => self.output = Some(v),
            "threads" => self.threads = Some(parse_num(key, &v)?),
            "mem_budget" => self.mem_budget = Some(v),
            _ => bail!("unknown config key {key:?}; known keys: {}", KEYS.join(", ")),
        }
        Ok(())
    }

    fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k, v);
            }
        };
        put("command", (!self.command.is_empty()).then(|| self.command.clone()));
        put("points", self.points.clone());
        put("k", self.k.map(|v| v.to_string()));
        put("cube", self.cube.map(|v| v.to_string()));
        put("box", self.box_spec.clone());
        put("side", self.side.map(|v| v.to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("l", self.l.map(|v| v.to_string()));
        put("z", self.z.clone());
        put("p", self.p.map(|v| v.to_string()));
        put("t", self.t.clone());
        put("s", self.s.map(|v| v.to_string()));
        put("method", self.method.clone());
        put("target", self.target.clone());
        put("mode", self.mode.clone());
        put("point", self.point.clone());
        put("table", self.table.clone());
        put("scan_limit", self.scan_limit.map(|v| v.to_string()));
        put("format", self.format.clone());
        put("output", self.output.clone());
        put("threads", self.threads.map(|v| v.to_string()));
        put("mem_budget", self.mem_budget.clone());
        m
    }

    /// Inverse of [`RunConfig::from_kv`], keys sorted.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn over(mut self, lower: &RunConfig) -> RunConfig {
        macro_rules! fill {
            ($($f:ident),*) => {
                $(if self.$f.is_none() { self.$f = lower.$f.clone(); })*
            };
        }
        fill!(
            points, k, cube, box_spec, side, n, l, z, p, t, s, method, target, mode, point, table, scan_limit, format,
            output, threads, mem_budget
        );
        if self.command.is_empty() {
            self.command = lower.command.clone();
        }
        self
    }
}
