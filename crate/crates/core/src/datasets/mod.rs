//! Pools of candidate pairs: synthetic generation, file ingestion and the
//! train/test/seed split.

pub mod io;
mod pool;
mod split;
mod synthetic;

use thiserror::Error;

use crate::order::TruthError;

pub use io::{load_dir, load_pool};
pub use pool::Pool;
pub use split::{split, Split, SplitConfig};
pub use synthetic::{generate_synthetic, SyntheticConfig};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("line {line}: expected {expected} features, got {got}")]
    Ragged { line: u64, expected: usize, got: usize },
    #[error("line {line}: non-finite feature value")]
    NonFinite { line: u64 },
    #[error("invalid ground truth: {0}")]
    Truth(#[from] TruthError),
    #[error("generated graph has no edges")]
    Degenerate,
    #[error("pool too small: need {needed} training pairs, have {available}")]
    TooSmall { needed: usize, available: usize },
    #[error("{0}")]
    Invalid(String),
}
