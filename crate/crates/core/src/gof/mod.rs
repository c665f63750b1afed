//! Goodness-of-fit tests on time-transformed trains.
//!
//! Under a correct model the transformed increments are iid unit
//! exponentials. Each test looks at that hypothesis from a different angle
//! and returns a [`TestReport`] carrying the statistic, the verdicts and
//! enough data to redraw its diagnostic plot.

pub mod ks;
mod ogata;
mod wiener;

pub use ks::{ks_cdf, ks_critical_value, ks_pvalue, ks_statistic};
pub use ogata::{
    berman_test, berman_u, default_window_ladder, serial_correlation_test, serial_correlation_test_with, spearman,
    uniform_test, variance_time_test, variance_time_test_at,
};
pub use wiener::{build_wiener_path, wiener_process_test, WienerPath};

use crate::boundary::BoundarySpec;
use crate::error::Result;
use crate::simulate::RngStream;
use crate::trains::TransformedTrain;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Levels at which every report records a verdict.
pub const REPORT_LEVELS: [f64; 2] = [0.05, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Line,
    Step,
    Points,
    Dotted,
}

/// One named (x, y) series of a diagnostic plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub kind: SeriesKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, kind: SeriesKind, x: Vec<f64>, y: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Self { name: name.into(), kind, x, y }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub x_label: String,
    pub y_label: String,
    pub log_scale: bool,
    pub series: Vec<Series>,
}

impl PlotData {
    pub fn is_empty(&self) -> bool {
        self.series.iter().all(|s| s.x.is_empty())
    }
}

/// Pass (true) or reject (false) at a significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub level: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistics: BTreeMap<String, f64>,
    pub p_value: Option<f64>,
    pub verdict_at: Vec<Verdict>,
    pub plot_data: PlotData,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl TestReport {
    fn from_p_value(name: &str, statistics: Vec<(String, f64)>, p: f64, plot_data: PlotData) -> Self {
        Self {
            test_name: name.to_string(),
            statistics: statistics.into_iter().collect(),
            p_value: Some(p),
            verdict_at: REPORT_LEVELS.iter().map(|&level| Verdict { level, pass: p >= level }).collect(),
            plot_data,
            notes: Vec::new(),
        }
    }

    pub fn statistic(&self, name: &str) -> Option<f64> {
        self.statistics.get(name).copied()
    }

    /// Verdict at `level`, if recorded; p-value tests answer for any level.
    pub fn passes_at(&self, level: f64) -> Option<bool> {
        if let Some(p) = self.p_value {
            return Some(p >= level);
        }
        self.verdict_at.iter().find(|v| (v.level - level).abs() < 1e-12).map(|v| v.pass)
    }
}

/// Settings for running all five tests on one transformed train.
#[derive(Debug, Clone)]
pub struct BatteryConfig {
    /// Significance level for the exit verdict.
    pub level: f64,
    pub permutations: usize,
    pub stream: RngStream,
    pub window_sizes: Option<Vec<f64>>,
    /// Band for the Wiener test; derived from `level` when absent.
    pub band: Option<BoundarySpec>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self { level: 0.05, permutations: 999, stream: RngStream::new(0, 0), window_sizes: None, band: None }
    }
}

/// Uniform, Berman, serial-correlation, variance–time and Wiener tests.
pub fn run_battery(tt: &TransformedTrain, config: &BatteryConfig) -> Result<Vec<TestReport>> {
    let band = match config.band {
        Some(b) => b,
        None => BoundarySpec::for_level(1.0 - config.level)?,
    };
    let mut levels = REPORT_LEVELS.to_vec();
    if !levels.iter().any(|&l| (l - config.level).abs() < 1e-12) {
        levels.push(config.level);
    }
    let vt = variance_time_test_at(tt, config.window_sizes.as_deref(), &levels)?;
    Ok(vec![
        uniform_test(tt)?,
        berman_test(tt)?,
        serial_correlation_test(tt, config.permutations, &config.stream)?,
        vt,
        wiener_process_test(&build_wiener_path(tt)?, &band),
    ])
}

/// Whether any report rejects at `level`.
pub fn any_rejects(reports: &[TestReport], level: f64) -> bool {
    reports.iter().any(|r| r.passes_at(level) == Some(false))
}
