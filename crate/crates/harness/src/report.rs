//! CSV reports with a metadata header.
//!
//! ```text
//! # version = 0.1.0
//! # config_hash = <sha256 hex>
//! experiment,n,quantity,mean,std_err,seed
//! ```

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const COLUMNS: &str = "experiment,n,quantity,mean,std_err,seed";

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub n: u32,
    pub quantity: String,
    pub mean: f64,
    pub std_err: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub version: String,
    pub config_hash: String,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(config_hash: String, rows: Vec<Row>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            rows,
        }
    }

    /// Rows of one quantity in schedule order.
    pub fn series(&self, quantity: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.quantity == quantity).collect()
    }
}

pub fn write_report(report: &Report, mut out: impl Write) -> Result<()> {
    writeln!(out, "# version = {}", report.version)?;
    writeln!(out, "# config_hash = {}", report.config_hash)?;
    writeln!(out, "{COLUMNS}")?;
    for r in &report.rows {
        if [&r.experiment, &r.quantity].iter().any(|s| s.contains(',') || s.contains('\n')) {
            return Err(Error::Report(format!("field of `{}` contains a separator", r.quantity)));
        }
        writeln!(
            out,
            "{},{},{},{:?},{:?},{}",
            r.experiment, r.n, r.quantity, r.mean, r.std_err, r.seed
        )?;
    }
    Ok(())
}

/// Writes the report to `path`, replacing any previous file.
pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_report(report, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn parse_report(text: &str) -> Result<Report> {
    let mut lines = text.lines();
    let mut meta = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| Error::Report(format!("missing `{key}` line")))?;
        line.strip_prefix('#')
            .and_then(|l| l.split_once('='))
            .filter(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim().to_string())
            .ok_or_else(|| Error::Report(format!("expected `# {key} = ...`, got `{line}`")))
    };
    let version = meta("version")?;
    let config_hash = meta("config_hash")?;
    if lines.next() != Some(COLUMNS) {
        return Err(Error::Report("missing column header".into()));
    }
    let bad = |line: &str| Error::Report(format!("bad row `{line}`"));
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(line));
            }
            Ok(Row {
                experiment: f[0].to_string(),
                n: f[1].parse().map_err(|_| bad(line))?,
                quantity: f[2].to_string(),
                mean: f[3].parse().map_err(|_| bad(line))?,
                std_err: f[4].parse().map_err(|_| bad(line))?,
                seed: f[5].parse().map_err(|_| bad(line))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        version,
        config_hash,
        rows,
    })
}
