//! Run reports and their on-disk layout.
//!
//! ```text
//! <out>/report.json
//! <out>/counts/<table>.csv
//! <out>/sweeps/<sweep>.csv
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ScenarioId, SCHEMA_VERSION};
use super::rate::RateReport;
use crate::detection::{write_tables_csv, CoincidenceTable};
use crate::error::{Error, Result};
use crate::witness::{write_counts_csv, SettingCounts};

/// Outcome counts of every setting of one GHZ measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    pub qubits: usize,
    pub settings: Vec<SettingCounts>,
}

/// Column-oriented sweep data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Everything determined by the configuration and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub scenario: ScenarioId,
    pub seed: u64,
    pub samples: u64,
    /// Configuration used, with the output directory removed.
    pub config: ExperimentConfig,
    pub rates: RateReport,
    pub coincidence_tables: BTreeMap<String, CoincidenceTable>,
    pub setting_counts: BTreeMap<String, CountsTable>,
    pub derived: BTreeMap<String, serde_json::Value>,
    pub sweeps: BTreeMap<String, SweepTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub wall_time_s: f64,
    pub software_version: String,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub body: ReportBody,
    pub meta: ReportMeta,
}

impl RunReport {
    pub fn new(body: ReportBody, meta: ReportMeta) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body,
            meta,
        }
    }

    /// Canonical JSON of the body; identical for identical (config, seed).
    pub fn body_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.body)?)
    }

    pub fn derived_f64(&self, key: &str) -> Option<f64> {
        self.body.derived.get(key).and_then(|v| v.as_f64())
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot create {}: {e}", path.display()),
        ))
    })
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", path.display()),
        ))
    })
}

/// Writes the report and its tables under `out`; returns the written paths.
pub fn emit_report(report: &RunReport, out: &Path) -> Result<Vec<PathBuf>> {
    let counts_dir = out.join("counts");
    let sweeps_dir = out.join("sweeps");
    create_dir(&counts_dir)?;
    create_dir(&sweeps_dir)?;
    let mut written = Vec::new();

    let path = out.join("report.json");
    serde_json::to_writer_pretty(create_file(&path)?, report)?;
    written.push(path);

    for (name, table) in &report.body.coincidence_tables {
        let path = counts_dir.join(format!("{name}.csv"));
        write_tables_csv(create_file(&path)?, std::slice::from_ref(table))?;
        written.push(path);
    }
    for (name, table) in &report.body.setting_counts {
        let path = counts_dir.join(format!("{name}.csv"));
        write_counts_csv(create_file(&path)?, table.qubits, &table.settings)?;
        written.push(path);
    }
    for (name, sweep) in &report.body.sweeps {
        let path = sweeps_dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_writer(create_file(&path)?);
        w.write_record(&sweep.columns)?;
        for row in &sweep.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
