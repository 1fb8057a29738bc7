//! Per-trial records and the summary report.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

/// Relative slack on bound comparisons: ratios equal in exact arithmetic can
/// differ in the last bits once the sides are evaluated as floats.
pub const BOUND_RTOL: f64 = 1e-9;

/// One trial: both sides as reported floats, and an exact verdict where the
/// comparison is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `Some(false)` marks an exact check that failed.
    pub exact: Option<bool>,
    pub detail: String,
}

impl TrialRecord {
    /// Ratio of nonnegative sides; `0/0 = 0` and `x/0 = ∞` for `x > 0`.
    pub fn new(trial: usize, lhs: f64, rhs: f64) -> Self {
        TrialRecord { trial, lhs, rhs, ratio: ratio(lhs, rhs), exact: None, detail: String::new() }
    }

    pub fn exact(mut self, holds: bool) -> Self {
        self.exact = Some(holds);
        self
    }

    pub fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub target: String,
    pub params: String,
    #[serde(rename = "M")]
    pub m: u32,
    pub seed: u64,
    pub trials: usize,
    pub max_ratio: f64,
    /// Trial attaining the maximum ratio (the first one on ties).
    pub witness: Option<usize>,
    pub witness_detail: Option<String>,
    /// Recorded regression bound on the maximum ratio, if any.
    pub bound: Option<f64>,
    pub exact_failures: usize,
    pub passed: bool,
    /// Extra named measurements.
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl VerificationReport {
    pub fn from_records(target: &str, params: &str, m: u32, seed: u64, records: Vec<TrialRecord>) -> Self {
        let mut witness: Option<usize> = None;
        for (t, r) in records.iter().enumerate() {
            if witness.is_none_or(|w| r.ratio > records[w].ratio) {
                witness = Some(t);
            }
        }
        let max_ratio = witness.map_or(0.0, |w| records[w].ratio);
        let exact_failures = records.iter().filter(|r| r.exact == Some(false)).count();
        VerificationReport {
            target: target.to_string(),
            params: params.to_string(),
            m,
            seed,
            trials: records.len(),
            max_ratio,
            witness: witness.map(|w| records[w].trial),
            witness_detail: witness.map(|w| records[w].detail.clone()).filter(|d| !d.is_empty()),
            bound: None,
            exact_failures,
            passed: exact_failures == 0,
            metrics: BTreeMap::new(),
            records,
        }
    }

    /// Asserts `max_ratio ≤ bound` on top of the exact checks, up to the
    /// rounding of the final float evaluation.
    pub fn with_bound(mut self, bound: Option<f64>) -> Self {
        self.bound = bound;
        self.passed = self.passed && bound.is_none_or(|b| self.max_ratio <= b * (1.0 + BOUND_RTOL));
        self
    }

    pub fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn fail(mut self) -> Self {
        self.passed = false;
        self
    }

    /// One CSV row per trial.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(File::create(path)?);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        serde_json::to_writer_pretty(File::create(path)?, self)?;
        Ok(())
    }

    pub fn summary_line(&self) -> String {
        let bound = self.bound.map_or("-".to_string(), |b| format!("{b:.6}"));
        format!(
            "{} {} [{}] M={} trials={} max_ratio={:.6} bound={} exact_failures={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.target,
            self.params,
            self.m,
            self.trials,
            self.max_ratio,
            bound,
            self.exact_failures
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(TrialRecord::new(0, 0.0, 0.0).ratio, 0.0);
        assert!(TrialRecord::new(0, 1.0, 0.0).ratio.is_infinite());
    }

    #[test]
    fn maximum_and_witness() {
        let recs = vec![TrialRecord::new(0, 1.0, 2.0), TrialRecord::new(1, 3.0, 2.0), TrialRecord::new(2, 3.0, 2.0)];
        let rep = VerificationReport::from_records("t", "", 3, 7, recs).with_bound(Some(1.5));
        assert_eq!(rep.max_ratio, 1.5);
        assert_eq!(rep.witness, Some(1));
        assert!(rep.passed);
        assert!(!rep.clone().with_bound(Some(1.4)).passed);
    }

    #[test]
    fn exact_failure_fails() {
        let recs = vec![TrialRecord::new(0, 1.0, 2.0).exact(false)];
        assert!(!VerificationReport::from_records("t", "", 3, 7, recs).passed);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![TrialRecord::new(0, 1.0, 2.0).detail("x"), TrialRecord::new(1, 0.0, 0.0).exact(true)];
        let rep = VerificationReport::from_records("t", "a=1", 3, 7, recs).metric("c", 2.0);
        let json = dir.path().join("r.json");
        let csv = dir.path().join("r.csv");
        rep.write_json(&json).unwrap();
        rep.write_csv(&csv).unwrap();
        let back: VerificationReport = serde_json::from_reader(File::open(&json).unwrap()).unwrap();
        assert_eq!(back.records.len(), 0);
        assert_eq!(VerificationReport { records: rep.records.clone(), ..back }, rep);
        let rows: Vec<TrialRecord> = csv::Reader::from_path(&csv).unwrap().deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows, rep.records);
    }
}
