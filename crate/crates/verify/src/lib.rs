//! Verification harness for the Walsh time-frequency library.
//!
//! Every inequality, identity and decomposition of the library is checked on
//! reproducible random batteries: exact sides are computed for each trial, the
//! ratio is recorded, and the maximum is compared with a stored baseline.

pub mod baseline;
pub mod batteries;
pub mod calibrate;
pub mod experiments;
pub mod gen;
pub mod identities;
pub mod oracle;
pub mod report;
pub mod targets;
pub mod tuples;

use thiserror::Error;

pub use baseline::{BaselineKey, BaselineStore};
pub use report::{TrialRecord, VerificationReport};
pub use targets::{check_inequality, Target};
pub use tuples::{AdmissibleTuple, Vertex};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported form and vertex pair: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Core(#[from] wtf_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, VerifyError>;
