//! Report envelope and CSV tables.

use crate::{LabError, RunConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

const SCHEMA_VERSION: &str = "1.0.0";

pub fn report_schema_version() -> &'static str {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub config: RunConfig,
    pub results: Vec<Value>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(config: RunConfig, results: Vec<Value>, warnings: Vec<String>) -> Self {
        Report { schema: format!("bulab-report/{SCHEMA_VERSION}"), config, results, warnings }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self, LabError> {
        serde_json::from_str(s)
            .map_err(|e| LabError::Parse { path: format!("report:{}:{}", e.line(), e.column()), message: e.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

/// Shortest round-trip form of a float; `NaN` and `inf` spelled out.
pub fn num_cell(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        x.to_string()
    }
}

/// Space-separated coordinates, for single CSV cells.
pub fn point_cell(p: &[f64]) -> String {
    p.iter().map(|&x| num_cell(x)).collect::<Vec<_>>().join(" ")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), LabError> {
    std::fs::write(path, contents).map_err(|source| LabError::Io { context: format!("writing {}", path.display()), source })
}
