//! Event-time containers and the plain-text spike file format.
//!
//! A spike file holds one decimal event time per line. Blank lines and lines
//! starting with `#` are ignored, except for `# key=value` headers: `horizon`
//! sets the observation end and `scale=lambda` marks a time-transformed train.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Strictly increasing, positive event times observed on (0, horizon].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    times: Vec<f64>,
    horizon: f64,
}

impl SpikeTrain {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        validate(&times, false)?;
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be finite and non-negative, got {horizon}")));
        }
        if let Some(&last) = times.last() {
            if horizon < last {
                return Err(Error::HorizonTooShort { horizon, last });
            }
        }
        Ok(Self { times, horizon })
    }

    /// A train with no events, the result of simulating over an empty window.
    pub fn empty(horizon: f64) -> Self {
        Self { times: Vec::new(), horizon: horizon.max(0.0) }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Inter-event intervals t_{j+1} − t_j.
    pub fn intervals(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Time from the last event to the end of observation.
    pub fn censored_gap(&self) -> Option<f64> {
        self.times.last().map(|&t| self.horizon - t)
    }

    /// N(t): the number of events in (0, t].
    pub fn counting_path(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfWindow { t, horizon: self.horizon });
        }
        Ok(self.times.partition_point(|&x| x <= t))
    }

    pub fn to_text(&self) -> String {
        write_text(&[("horizon", self.horizon)], None, &self.times)
    }
}

/// Event times after the time transformation, with the first event as origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedTrain {
    lambdas: Vec<f64>,
    total: f64,
}

impl TransformedTrain {
    pub fn new(lambdas: Vec<f64>, total: f64) -> Result<Self> {
        validate(&lambdas, true)?;
        if let Some(&last) = lambdas.last() {
            if !(total >= last) {
                return Err(Error::HorizonTooShort { horizon: total, last });
            }
        }
        Ok(Self { lambdas, total })
    }

    /// Build the transformed times 0, x₁, x₁ + x₂, … from positive increments.
    /// The total is the last transformed time (no censored tail).
    pub fn from_increments(increments: &[f64]) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        lambdas.push(acc);
        for &x in increments {
            acc += x;
            lambdas.push(acc);
        }
        Self::new(lambdas, acc)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Λ evaluated at the end of observation.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.lambdas.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Transformed length beyond the last event, excluded from interval tests.
    pub fn censored_tail(&self) -> f64 {
        self.lambdas.last().map_or(self.total, |&l| self.total - l)
    }

    /// Same events with a different observation end.
    pub fn with_total(&self, total: f64) -> Result<Self> {
        Self::new(self.lambdas.clone(), total)
    }

    pub fn to_text(&self) -> String {
        write_text(&[("horizon", self.total)], Some("lambda"), &self.lambdas)
    }
}

fn validate(values: &[f64], allow_zero: bool) -> Result<()> {
    let mut previous: Option<f64> = None;
    for (i, &v) in values.iter().enumerate() {
        let line = i + 1;
        if !v.is_finite() {
            return Err(Error::Parse { line, text: v.to_string() });
        }
        if v < 0.0 || (v == 0.0 && !allow_zero) {
            return Err(Error::NonPositiveTime { line, value: v });
        }
        if let Some(p) = previous {
            if v <= p {
                return Err(Error::NonMonotone { line, value: v, previous: p });
            }
        }
        previous = Some(v);
    }
    Ok(())
}

/// A parsed spike file before it is turned into a train.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeFile {
    pub values: Vec<f64>,
    pub horizon: Option<f64>,
    pub transformed: bool,
}

/// Parse the text format. Line numbers in errors are 1-based file lines.
pub fn parse_spike_file(text: &str) -> Result<SpikeFile> {
    let mut values = Vec::new();
    let mut horizon = None;
    let mut transformed = false;
    let mut previous: Option<f64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.trim().split_once('=') {
                match key.trim() {
                    "horizon" => {
                        let v = value.trim();
                        horizon = Some(v.parse::<f64>().map_err(|_| Error::Parse { line, text: v.to_string() })?);
                    }
                    "scale" => transformed = value.trim() == "lambda",
                    _ => {}
                }
            }
            continue;
        }
        let v: f64 = trimmed
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::Parse { line, text: trimmed.to_string() })?;
        if v < 0.0 || (v == 0.0 && !(transformed && previous.is_none())) {
            return Err(Error::NonPositiveTime { line, value: v });
        }
        if let Some(p) = previous {
            if v <= p {
                return Err(Error::NonMonotone { line, value: v, previous: p });
            }
        }
        previous = Some(v);
        values.push(v);
    }
    Ok(SpikeFile { values, horizon, transformed })
}

/// Parse a spike train. An explicit `horizon` wins over a `# horizon=` header;
/// with neither, the horizon is the last event time.
pub fn parse_train(text: &str, horizon: Option<f64>) -> Result<SpikeTrain> {
    let file = parse_spike_file(text)?;
    let last = file.values.last().copied().unwrap_or(0.0);
    let horizon = horizon.or(file.horizon).unwrap_or(last);
    SpikeTrain::new(file.values, horizon)
}

/// Parse a transformed train written by [`TransformedTrain::to_text`].
pub fn parse_transformed(text: &str) -> Result<TransformedTrain> {
    let file = parse_spike_file(text)?;
    let last = file.values.last().copied().unwrap_or(0.0);
    TransformedTrain::new(file.values, file.horizon.unwrap_or(last))
}

fn write_text(headers: &[(&str, f64)], scale: Option<&str>, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20 + 64);
    if let Some(scale) = scale {
        let _ = writeln!(out, "# scale={scale}");
    }
    for (key, value) in headers {
        let _ = writeln!(out, "# {key}={value:?}");
    }
    // `{:?}` on f64 is the shortest representation that parses back exactly
    for v in values {
        let _ = writeln!(out, "{v:?}");
    }
    out
}
