//! Experiment runner: one named experiment per config, producing a CSV of
//! raw measurements, a JSON summary of assertions and a run manifest.

mod config;
mod plot;
mod runs;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub use config::*;
pub use plot::{emit_plot_data, PlotKind, PlotOptions};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ASSERTION_FAILURE: i32 = 1;
    pub const INVALID_CONFIG: i32 = 2;
    pub const COMPUTATIONAL_FAILURE: i32 = 3;
}

/// Rows of one CSV file, all cells already formatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
    }
}

/// Shortest round-trip formatting, so CSV bodies are reproducible.
pub fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: String,
}

/// Collects assertions, scaling every tolerance by the configured factor.
#[derive(Debug, Clone)]
pub struct Verdicts {
    scale: f64,
    pub assertions: Vec<Assertion>,
    pub errors: Vec<String>,
}

impl Verdicts {
    pub fn new(scale: f64) -> Self {
        Self { scale, assertions: Vec::new(), errors: Vec::new() }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// measured <= tol
    pub fn at_most(&mut self, name: impl Into<String>, measured: f64, tol: f64) -> bool {
        let t = tol * self.scale;
        let passed = measured <= t;
        self.assertions.push(Assertion { name: name.into(), passed, measured, threshold: format!("<= {t:e}") });
        passed
    }

    /// measured >= floor, with the floor divided by the scale factor.
    pub fn at_least(&mut self, name: impl Into<String>, measured: f64, floor: f64) -> bool {
        let t = floor / self.scale;
        let passed = measured >= t;
        self.assertions.push(Assertion { name: name.into(), passed, measured, threshold: format!(">= {t:e}") });
        passed
    }

    /// lo <= measured <= hi, widened multiplicatively by the scale factor.
    pub fn within(&mut self, name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> bool {
        let (l, h) = (lo / self.scale, hi * self.scale);
        let passed = measured >= l && measured <= h;
        self.assertions.push(Assertion { name: name.into(), passed, measured, threshold: format!("in [{l:e}, {h:e}]") });
        passed
    }

    pub fn record(&mut self, ok: bool, name: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed: ok,
            measured: if ok { 1.0 } else { 0.0 },
            threshold: "holds".into(),
        });
    }

    pub fn error(&mut self, context: impl std::fmt::Display, e: impl std::fmt::Display) {
        self.errors.push(format!("{context}: {e}"));
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    AssertionFailure,
    ComputationalFailure,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Pass => exit::PASS,
            Self::AssertionFailure => exit::ASSERTION_FAILURE,
            Self::ComputationalFailure => exit::COMPUTATIONAL_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub name: Option<String>,
    pub status: RunStatus,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub computational_errors: Vec<String>,
    /// Experiment-specific derived quantities, such as recorded constants.
    pub derived: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub table: Table,
    pub seconds: f64,
}

impl RunOutcome {
    pub fn status(&self) -> RunStatus {
        self.summary.status
    }
}

/// What one experiment produced before packaging.
pub(crate) struct Produced {
    pub table: Table,
    pub verdicts: Verdicts,
    pub derived: serde_json::Value,
}

/// Runs the configured experiment and writes artifacts when `opts.out` is set.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> std::io::Result<RunOutcome> {
    let mut cfg = cfg.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(t) = opts.tolerance_scale {
        cfg.tolerance_scale = t;
    }
    let start = Instant::now();
    let produced = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(std::io::Error::other)?
            .install(|| runs::dispatch(&cfg)),
        None => runs::dispatch(&cfg),
    };
    let seconds = start.elapsed().as_secs_f64();
    let Produced { table, verdicts, derived } = produced;
    let status = if !verdicts.errors.is_empty() {
        RunStatus::ComputationalFailure
    } else if verdicts.all_passed() {
        RunStatus::Pass
    } else {
        RunStatus::AssertionFailure
    };
    let summary = Summary {
        experiment: cfg.experiment,
        name: cfg.name.clone(),
        status,
        passed: status == RunStatus::Pass,
        assertions: verdicts.assertions,
        computational_errors: verdicts.errors,
        derived,
    };
    let outcome = RunOutcome { summary, table, seconds };
    if let Some(dir) = &opts.out {
        write_artifacts(dir, &cfg, opts, &outcome)?;
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: ExperimentKind,
    config: &'a ExperimentConfig,
    crate_name: &'static str,
    crate_version: &'static str,
    threads: Option<usize>,
    started_unix_seconds: u64,
    wall_seconds: f64,
    rows: usize,
    status: RunStatus,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MEASUREMENTS_FILE: &str = "measurements.csv";
pub const SUMMARY_FILE: &str = "summary.json";

fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, opts: &RunOptions, o: &RunOutcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = Manifest {
        experiment: cfg.experiment,
        config: cfg,
        crate_name: env!("CARGO_PKG_NAME"),
        crate_version: env!("CARGO_PKG_VERSION"),
        threads: opts.threads,
        started_unix_seconds: now.saturating_sub(o.seconds as u64),
        wall_seconds: o.seconds,
        rows: o.table.rows.len(),
        status: o.summary.status,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_vec_pretty(&manifest)?)?;
    fs::write(dir.join(MEASUREMENTS_FILE), o.table.to_csv()?)?;
    let mut f = fs::File::create(dir.join(SUMMARY_FILE))?;
    f.write_all(&serde_json::to_vec_pretty(&o.summary)?)?;
    f.write_all(b"\n")?;
    Ok(())
}
