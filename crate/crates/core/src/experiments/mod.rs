//! Named, configuration-driven experiments producing CSV tables and a JSON
//! summary. Everything here runs in `f64`.

mod blowup;
mod config;
mod continuity;
mod decay;
mod envelope;
pub mod fields;
mod norms_audit;
mod propagator_check;
mod smoothing;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

pub use blowup::{blowup_probe, BlowupLevel, BlowupProbeReport, ProbeVerdict};
pub use config::{
    parse_config, BlowupConfig, ConfigError, ContinuityConfig, DecayConfig, EnvelopeConfig, EnvelopeKind, EnvelopeRegime, ExperimentConfig,
    NormsAuditConfig, PropagatorCheckConfig, ResolvedConfig, SmoothingConfig, BLOWUP_LEVELS, DECAY_MAX_ALPHA, KNOWN_KEYS,
};
pub use continuity::{bump_continuity, column_summary, ContinuityRow};
pub use decay::{decay_scenario, DecayOutcome};
pub use norms_audit::{E32_BASELINE, INDICATOR_TOLERANCE};
pub use smoothing::{smoothing_sweep, SMOOTHING_LONG_TIME_FACTOR, SMOOTHING_SUP_STABILITY};

use crate::error::Result;

pub(crate) use config::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    PropagatorCheck,
    SmoothingSweep,
    Continuity,
    NormsAudit,
    EnvelopeAudit,
    Decay,
    BlowupProbe,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::PropagatorCheck,
        Experiment::SmoothingSweep,
        Experiment::Continuity,
        Experiment::NormsAudit,
        Experiment::EnvelopeAudit,
        Experiment::Decay,
        Experiment::BlowupProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PropagatorCheck => "propagator-check",
            Experiment::SmoothingSweep => "smoothing-sweep",
            Experiment::Continuity => "continuity",
            Experiment::NormsAudit => "norms-audit",
            Experiment::EnvelopeAudit => "envelope-audit",
            Experiment::Decay => "decay",
            Experiment::BlowupProbe => "blowup-probe",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Text(String::new()), Cell::Num)
    }
}

/// Locale-free number formatting: shortest round-trip digits, scientific
/// notation outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => f.write_str(&format_number(*x)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// A pass/fail assertion with its measured value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// `"<="`, `">="`, `"<"` or `"flag"`.
    pub relation: &'static str,
    pub limit: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, relation: "<=", limit, passed: measured <= limit, note: None }
    }

    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, relation: "<", limit, passed: measured < limit, note: None }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), measured, relation: ">=", limit, passed: measured >= limit, note: None }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), measured: if passed { 1.0 } else { 0.0 }, relation: "flag", limit: 1.0, passed, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "measured": num(self.measured),
            "relation": self.relation,
            "limit": num(self.limit),
            "passed": self.passed,
        });
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        v
    }
}

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub config: Value,
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(config: &ExperimentConfig) -> Self {
        Self { experiment: config.experiment(), config: config.to_json(), results: Map::new(), tables: Vec::new(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    fn note(&mut self, text: impl Into<String>) {
        let notes = self.results.entry("notes").or_insert_with(|| json!([]));
        notes.as_array_mut().expect("notes is an array").push(json!(text.into()));
    }

    pub fn csv_file_name(&self, table: &Table) -> String {
        format!("{}_{}.csv", self.experiment.name(), table.name)
    }

    pub fn json_file_name(&self) -> String {
        format!("{}.json", self.experiment.name())
    }

    /// The summary document: `{config, results, verdicts, versions}`.
    pub fn to_json(&self) -> Value {
        let mut results = self.results.clone();
        results.insert("tables".into(), json!(self.tables.iter().map(|t| self.csv_file_name(t)).collect::<Vec<_>>()));
        json!({
            "config": self.config,
            "results": Value::Object(results),
            "verdicts": {
                "passed": self.passed(),
                "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            },
            "versions": {
                "hermheat-core": env!("CARGO_PKG_VERSION"),
                "report-format": 1,
            },
        })
    }

    /// Writes the JSON summary and one CSV per table into `dir`, returning
    /// the written paths. All file contents are rendered before any file is
    /// created.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let mut files = vec![(self.json_file_name(), serde_json::to_string_pretty(&self.to_json()).expect("serialisable") + "\n")];
        for t in &self.tables {
            files.push((self.csv_file_name(t), t.to_csv()));
        }
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs a validated configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    match config {
        ExperimentConfig::PropagatorCheck(c) => propagator_check::run(config, c),
        ExperimentConfig::SmoothingSweep(c) => smoothing::run(config, c),
        ExperimentConfig::Continuity(c) => continuity::run(config, c),
        ExperimentConfig::NormsAudit(c) => norms_audit::run(config, c),
        ExperimentConfig::EnvelopeAudit(c) => envelope::run(config, c),
        ExperimentConfig::Decay(c) => decay::run(config, c),
        ExperimentConfig::BlowupProbe(c) => blowup::run(config, c),
    }
}
