//! Report documents. The `report` block is a pure function of the
//! configuration and seed; timing and host details go in `metadata`.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::Serialize;

use crate::{Exit, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub instance: String,
    pub n: usize,
    pub k: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub steps: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub estimator: Option<&'static str>,
    /// Achieved value: `f` of the returned set, or the mean total for
    /// welfare.
    pub value: f64,
    pub value_std_err: Option<f64>,
    /// `F` of the fractional point before rounding.
    pub fractional_value: Option<f64>,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub theoretical_ratio: f64,
    pub theoretical_regime: Option<bool>,
    pub queries: u64,
    pub solution: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn csv_row(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            ("algorithm", self.algorithm.clone()),
            ("instance", self.instance.clone()),
            ("n", self.n.to_string()),
            ("k", self.k.map(|k| k.to_string()).unwrap_or_default()),
            ("T", opt(self.t)),
            ("steps", self.steps.map(|s| s.to_string()).unwrap_or_default()),
            ("samples", self.samples.map(|s| s.to_string()).unwrap_or_default()),
            ("seed", self.seed.to_string()),
            ("value", self.value.to_string()),
            ("fractional_value", opt(self.fractional_value)),
            ("opt", opt(self.opt)),
            ("ratio", opt(self.ratio)),
            ("theoretical_ratio", self.theoretical_ratio.to_string()),
            (
                "theoretical_regime",
                self.theoretical_regime.map(|b| b.to_string()).unwrap_or_default(),
            ),
            ("queries", self.queries.to_string()),
            (
                "solution",
                self.solution
                    .as_ref()
                    .map(|s| s.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default(),
            ),
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
    pub wall_time_ms: f64,
    pub host: String,
    pub os: &'static str,
    pub arch: &'static str,
    pub threads: usize,
    pub parallel: bool,
    pub version: &'static str,
}

impl Metadata {
    pub fn collect(wall: Duration) -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_owned())
            .unwrap_or_default();
        Metadata {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_time_ms: wall.as_secs_f64() * 1e3,
            host,
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            threads: symsub::par::threads(),
            parallel: symsub::par::is_parallel(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    report: &'a R,
    metadata: &'a Metadata,
}

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(
            File::create(p).map_err(|e| Failure::new(Exit::Parse, format!("cannot write {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::new(Exit::Parse, format!("writing the report: {e}"))
}

pub fn write_json<R: Serialize>(out: Option<&Path>, report: &R, metadata: &Metadata) -> Result<(), Failure> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &Document { report, metadata }).map_err(io_failure)?;
    writeln!(w).map_err(io_failure)?;
    Ok(())
}

pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header).map_err(io_failure)?;
    for r in rows {
        w.write_record(r).map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)?;
    Ok(())
}
