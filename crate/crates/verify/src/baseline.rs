//! Store of recorded empirical constants, one JSON file per (target, M, params).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::VerificationReport;
use crate::Result;

/// Environment variable naming the store directory.
pub const BASELINE_ENV: &str = "WTF_BASELINE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaselineKey {
    pub target: String,
    #[serde(rename = "M")]
    pub m: u32,
    pub params: String,
}

impl BaselineKey {
    pub fn new(target: &str, m: u32, params: &str) -> Self {
        BaselineKey { target: target.to_string(), m, params: params.to_string() }
    }

    pub fn of(report: &VerificationReport) -> Self {
        BaselineKey::new(&report.target, report.m, &report.params)
    }

    fn file_name(&self) -> String {
        let clean = |s: &str| s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect::<String>();
        if self.params.is_empty() {
            format!("{}__M{}.json", clean(&self.target), self.m)
        } else {
            format!("{}__M{}__{}.json", clean(&self.target), self.m, clean(&self.params))
        }
    }
}

/// A recorded maximum ratio and where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    #[serde(flatten)]
    pub key: BaselineKey,
    pub max_ratio: f64,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct BaselineStore {
    dir: PathBuf,
}

impl BaselineStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        BaselineStore { dir: dir.into() }
    }

    /// The directory named by `WTF_BASELINE_DIR`, else the store shipped with this crate.
    pub fn from_env() -> Self {
        match std::env::var_os(BASELINE_ENV) {
            Some(d) => BaselineStore::new(d),
            None => BaselineStore::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("baselines")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get(&self, key: &BaselineKey) -> Result<Option<Baseline>> {
        let path = self.dir.join(key.file_name());
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_str(&fs::read_to_string(path)?)?))
    }

    pub fn bound(&self, key: &BaselineKey) -> Result<Option<f64>> {
        Ok(self.get(key)?.map(|b| b.max_ratio))
    }

    /// Attaches a bound and re-evaluates the verdict: `intrinsic` when the
    /// constant is known exactly, else the recorded baseline for the key.
    pub fn judge(&self, report: VerificationReport, intrinsic: Option<f64>) -> Result<VerificationReport> {
        let bound = match intrinsic {
            Some(b) => Some(b),
            None => self.bound(&BaselineKey::of(&report))?,
        };
        Ok(report.with_bound(bound))
    }

    /// Stores the report's maximum ratio as the baseline for its key.
    pub fn record(&self, report: &VerificationReport) -> Result<Baseline> {
        fs::create_dir_all(&self.dir)?;
        let b = Baseline { key: BaselineKey::of(report), max_ratio: report.max_ratio, seed: report.seed, trials: report.trials };
        fs::write(self.dir.join(b.key.file_name()), serde_json::to_string_pretty(&b)? + "\n")?;
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::TrialRecord;

    #[test]
    fn record_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let store = BaselineStore::new(dir.path());
        let rep = VerificationReport::from_records("size-bound", "j=1", 3, 5, vec![TrialRecord::new(0, 2.0, 1.0)]);
        let key = BaselineKey::of(&rep);
        assert_eq!(store.bound(&key).unwrap(), None);
        store.record(&rep).unwrap();
        assert_eq!(store.bound(&key).unwrap(), Some(2.0));
        assert_eq!(store.bound(&BaselineKey::new("size-bound", 4, "j=1")).unwrap(), None);
    }

    #[test]
    fn file_names_are_distinct_per_params() {
        let a = BaselineKey::new("abstract", 3, "theta=1/3,1/3,1/3").file_name();
        let b = BaselineKey::new("abstract", 3, "theta=1/2,1/4,1/4").file_name();
        assert_ne!(a, b);
    }
}
