//! Training harnesses for the min-max experiments: dominance-constrained
//! portfolio selection, WGANs with and without a convex-order penalty, purely
//! Choquet-Toland-driven generative modeling, and a sample-size rate study
//! for the distance estimator.

mod gan;
mod portfolio;
mod rate;

pub use gan::{train_ct_gan, train_dominance_gan, train_wgan, GanConfig, GanResult, GpMode};
pub use portfolio::{train_portfolio, PortfolioConfig, PortfolioResult};
pub use rate::{rate_experiment, RateConfig, RatePoint, RateResult};

use crate::error::{Error, Result};
use std::path::Path;

/// Column-labelled run log, one row per outer step, append-only.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl TrainLog {
    pub fn new(columns: &[&str]) -> Self {
        TrainLog {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; its width must match the header.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "log row width");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// All values of the named column, in step order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// The named column's value in the last row.
    pub fn last(&self, name: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows.last().map(|r| r[j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
