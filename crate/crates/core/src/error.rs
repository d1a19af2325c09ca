use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the flashread library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported number of levels {0} (expected 2, 4 or 8)")]
    UnsupportedLevels(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected {expected} thresholds, got {got}")]
    ThresholdCountMismatch { expected: usize, got: usize },
    #[error("failed to bracket: {0}")]
    Bracket(String),
    #[error("pdf log-ratio is not monotone across boundary {boundary}")]
    NonMonotoneRatio { boundary: usize },
    #[error("quadrature did not converge to {tol:e} (estimated error {err:e})")]
    Quadrature { tol: f64, err: f64 },
    #[error("rate {rate} is not achievable even at the top of the SNR range")]
    Unachievable { rate: f64 },
    #[error("negative probability entry {0}")]
    NegativeProbability(f64),
    #[error("malformed alist at line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("message length {got} does not match code dimension {expected}")]
    MessageLength { expected: usize, got: usize },
    #[error("output symbol {symbol} has zero probability under every level")]
    ZeroMass { symbol: usize },
    #[error("code construction failed: {0}")]
    Construction(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("code and channel are incompatible: {0}")]
    Incompatible(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
