use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid mismatch: M = {left} vs M = {right}")]
    GridMismatch { left: u32, right: u32 },
    #[error("{what} lies outside the ambient grid M = {m}")]
    OutOfGrid { what: String, m: u32 },
    #[error("cells overlap: {0}")]
    Overlap(String),
    #[error("major subset failed: |E \\ Ω| = {kept} < |E|/2 with |E| = {total}")]
    MajorSubset { kept: f64, total: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
