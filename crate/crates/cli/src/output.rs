//! Report sinks: a JSON document or CSV rows, to stdout or a file.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{bail, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(raw: Option<&str>, default: Format) -> Result<Format> {
        match raw.map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => bail!("unknown format {other:?}; expected json or csv"),
        }
    }
}

pub enum Report {
    Json(serde_json::Value),
    Csv {
        header: Vec<&'static str>,
        rows: Vec<Vec<String>>,
    },
}

fn sink(path: Option<&str>) -> Result<Box<dyn Write>> {
    Ok(match path {
        None | Some("-") => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {p}"))?,
        )),
    })
}

pub fn emit(report: &Report, path: Option<&str>) -> Result<()> {
    let mut out = sink(path)?;
    match report {
        Report::Json(v) => {
            serde_json::to_writer_pretty(&mut out, v)?;
            writeln!(out)?;
        }
        Report::Csv { header, rows } => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}
