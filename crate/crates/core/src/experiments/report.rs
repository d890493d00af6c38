//! Run reports and their on-disk layout:
//!
//! ```text
//! OUT/summary.json
//! OUT/timing.json
//! OUT/tables/NAME.csv
//! OUT/plots/NAME.svg
//! ```
//!
//! `summary.json` depends only on the effective config and seed; wall-clock
//! data goes to `timing.json`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::svg::{Plot, Series};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Formats a float for tables: shortest round-trip representation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub version: String,
    pub config: Value,
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<Plot>,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

impl Report {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        fs::create_dir_all(out.join("tables"))?;
        fs::create_dir_all(out.join("plots"))?;
        fs::write(out.join("summary.json"), self.summary_json())?;
        let timing = serde_json::json!({ "elapsed_seconds": self.elapsed_seconds });
        fs::write(out.join("timing.json"), serde_json::to_string_pretty(&timing)? + "\n")?;
        for t in &self.tables {
            fs::write(out.join("tables").join(format!("{}.csv", t.name)), t.to_csv())?;
        }
        for p in &self.plots {
            fs::write(out.join("plots").join(format!("{}.svg", p.name)), p.to_svg())?;
        }
        Ok(())
    }
}

/// SHA-256 of the compact JSON of `config` (object keys are sorted).
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// A log-log plot of one or more `(x, y)` series; nonpositive values are
/// dropped.
pub fn loglog(name: &str, title: &str, x_label: &str, y_label: &str, series: Vec<(String, Vec<f64>, Vec<f64>)>) -> Plot {
    Plot {
        name: name.into(),
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_x: true,
        log_y: true,
        series: series
            .into_iter()
            .map(|(label, xs, ys)| Series { label, xs, ys })
            .collect(),
    }
}
