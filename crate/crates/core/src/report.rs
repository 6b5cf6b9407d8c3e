//! Residual reports: the machine-readable output unit of the verifiers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    /// The identity being checked, written as a formula.
    pub anchor: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(default)]
    pub meta: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub suite: String,
    #[serde(default)]
    pub config: Value,
    pub entries: Vec<ReportEntry>,
    pub elapsed_s: f64,
}

impl ResidualReport {
    pub fn new(suite: impl Into<String>) -> Self {
        ResidualReport {
            suite: suite.into(),
            config: Value::Null,
            entries: Vec::new(),
            elapsed_s: 0.0,
        }
    }

    pub fn push(
        &mut self,
        id: impl Into<String>,
        anchor: impl Into<String>,
        residual: f64,
        tol: f64,
        meta: Value,
    ) {
        self.entries.push(ReportEntry {
            id: id.into(),
            anchor: anchor.into(),
            residual,
            tol,
            pass: residual <= tol,
            meta,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, e| m.max(e.residual))
    }

    /// Order-stable output: sort entries by id.
    pub fn sort_entries(&mut self) {
        self.entries.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
        self.elapsed_s += other.elapsed_s;
    }
}
