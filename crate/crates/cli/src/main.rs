//! `latvis`: exact visible-lattice-point counts, sieve bounds and certified
//! density reports.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use latvis_core::Error as CoreError;

#[derive(Parser, Debug)]
#[command(
    name = "latvis",
    version,
    about = "Visible lattice points: counts, sieve bounds, certified densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// json or csv; each command has its own default.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Memory cap such as 512M or 4G; overrides LATVIS_MEM_BUDGET.
    #[arg(long = "mem-budget", global = true)]
    mem_budget: Option<String>,
    /// Print the merged configuration as `key = value` lines and exit.
    #[arg(long = "print-config", global = true)]
    print_config: bool,
}

#[derive(Args, Debug, Default)]
struct PointArgs {
    /// Point set, e.g. "(0,0),(1,0)" or "(1,0);(0,1)".
    #[arg(long = "S", visible_alias = "points")]
    points: Option<String>,
    /// Dimension; inferred from S when omitted.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args, Debug, Default)]
struct BoxArgs {
    /// The cube [1, L]^k.
    #[arg(long)]
    cube: Option<u64>,
    /// A box such as "[3,5)x[10,14)".
    #[arg(long = "box")]
    box_spec: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact count of points of a box visible from every point of S.
    Count {
        #[command(flatten)]
        pts: PointArgs,
        #[command(flatten)]
        bx: BoxArgs,
        /// auto, brute, sieve or jordan.
        #[arg(long)]
        method: Option<String>,
    },
    /// Selberg-sieve upper bound next to the exact count.
    Bound {
        #[command(flatten)]
        pts: PointArgs,
        #[command(flatten)]
        bx: BoxArgs,
        /// Sieve level, or "auto".
        #[arg(long)]
        z: Option<String>,
    },
    /// Schnirelmann-density certificate for v2, v3 or pair.
    Sd {
        #[arg(long)]
        target: Option<String>,
        #[arg(long = "scan-limit")]
        scan_limit: Option<u64>,
    },
    /// Bad-visibility scan of the cubes [1, L]^k for L ≤ N.
    Scan {
        #[command(flatten)]
        pts: PointArgs,
        #[arg(long = "N", visible_alias = "limit")]
        n: Option<u64>,
    },
    /// Lattice points in discs: census, sd or scan.
    Disc {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long = "N", visible_alias = "limit")]
        n: Option<u64>,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Averages of the graded visibility function over shift boxes.
    Ergodic {
        #[arg(long)]
        k: Option<u32>,
        /// Integer point whose image is averaged, default the origin.
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        s: Option<u32>,
        /// Number of retained primes, or a comma-separated list.
        #[arg(long = "T")]
        t: Option<String>,
        /// Shift box such as "[0,100)x[0,100)".
        #[arg(long = "box")]
        box_spec: Option<String>,
        /// Shift box [0, side)^k.
        #[arg(long)]
        side: Option<u64>,
        /// average, binary or adversarial.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Fractional-part Möbius sums.
    Msum {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long = "L")]
        l: Option<u64>,
        /// Truncation point for the infinite sums.
        #[arg(long = "P")]
        p: Option<u64>,
        #[arg(long = "N", visible_alias = "limit")]
        n: Option<u64>,
        /// partial, infinite, h, identity or witnesses.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Reproduces the bad-visibility tables.
    Tables {
        /// 1, 2, 3 or all.
        #[arg(long)]
        table: Option<String>,
        #[arg(long = "N", visible_alias = "limit")]
        n: Option<u64>,
    },
}

fn flags_config(cli: Cli) -> (RunConfig, Option<PathBuf>, bool) {
    let g = cli.global;
    let mut c = RunConfig {
        format: g.format,
        output: g.output,
        threads: g.threads,
        mem_budget: g.mem_budget,
        ..RunConfig::default()
    };
    match cli.command {
        Command::Count { pts, bx, method } => {
            c.command = "count".into();
            (c.points, c.k, c.cube, c.box_spec, c.method) = (pts.points, pts.k, bx.cube, bx.box_spec, method);
        }
        Command::Bound { pts, bx, z } => {
            c.command = "bound".into();
            (c.points, c.k, c.cube, c.box_spec, c.z) = (pts.points, pts.k, bx.cube, bx.box_spec, z);
        }
        Command::Sd { target, scan_limit } => {
            c.command = "sd".into();
            (c.target, c.scan_limit) = (target, scan_limit);
        }
        Command::Scan { pts, n } => {
            c.command = "scan".into();
            (c.points, c.k, c.n) = (pts.points, pts.k, n);
        }
        Command::Disc { k, n, mode } => {
            c.command = "disc".into();
            (c.k, c.n, c.mode) = (k, n, mode);
        }
        Command::Ergodic {
            k,
            point,
            s,
            t,
            box_spec,
            side,
            mode,
        } => {
            c.command = "ergodic".into();
            (c.k, c.point, c.s, c.t, c.box_spec, c.side, c.mode) = (k, point, s, t, box_spec, side, mode);
        }
        Command::Msum { k, l, p, n, mode } => {
            c.command = "msum".into();
            (c.k, c.l, c.p, c.n, c.mode) = (k, l, p, n, mode);
        }
        Command::Tables { table, n } => {
            c.command = "tables".into();
            (c.table, c.n) = (table, n);
        }
    }
    (c, g.config, g.print_config)
}

/// 0 ok, 1 usage, 2 capacity, 3 partial or infeasible.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Capacity { .. }) => 2,
        Some(CoreError::CutoffInfeasible { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (flags, config_path, print_config) = flags_config(cli);
    let config = match config_path.map(|p| RunConfig::from_file(&p)).transpose() {
        Ok(file) => match file {
            Some(file) => flags.over(&file),
            None => flags,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if print_config {
        print!("{}", config.to_kv());
        return ExitCode::SUCCESS;
    }
    match commands::run(&config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
