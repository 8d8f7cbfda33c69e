//! Classifiers used by the query strategies and the evaluation harness.

mod ensemble;
pub mod logistic;
mod metrics;
mod tree;

use thiserror::Error;

pub use ensemble::{Committee, ForestModel, ForestParams};
pub use logistic::{LogisticModel, LogisticParams};
pub use metrics::auc;
pub use tree::{TreeModel, TreeNode, TreeParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("no training data")]
    Empty,
    #[error("feature vectors have zero dimension")]
    ZeroDim,
    #[error("expected {expected} features, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("AUC is undefined when only one class is present")]
    SingleClass,
    #[error("non-finite score at position {0}")]
    NonFiniteScore(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// Validates a training set and returns its dimension.
pub(crate) fn check_data(x: &[&[f64]], y: &[crate::order::Label]) -> Result<usize, LearnerError> {
    if x.len() != y.len() {
        return Err(LearnerError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    let first = x.first().ok_or(LearnerError::Empty)?;
    let dim = first.len();
    if dim == 0 {
        return Err(LearnerError::ZeroDim);
    }
    if let Some(row) = x.iter().find(|r| r.len() != dim) {
        return Err(LearnerError::DimMismatch {
            expected: dim,
            got: row.len(),
        });
    }
    Ok(dim)
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<(), LearnerError> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(LearnerError::DimMismatch { expected, got: x.len() })
    }
}

/// Hyperparameters for every model the harness trains.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub logistic: LogisticParams,
    pub committee_size: usize,
    pub committee_tree: TreeParams,
    pub forest: ForestParams,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            logistic: LogisticParams::default(),
            committee_size: 3,
            committee_tree: TreeParams::default(),
            forest: ForestParams::default(),
        }
    }
}
