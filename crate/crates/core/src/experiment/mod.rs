//! Simulated active-learning runs: the query loop, repeated trials,
//! aggregation and plot-ready outputs.

mod aggregate;
mod learner;
mod output;
mod profile;
mod trial;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{DatasetError, SplitConfig};
use crate::learners::{LearnerConfig, LearnerError};
use crate::order::{ClosureError, Pruning};
use crate::strategies::{Strategy, StrategyError, StrategyKind};

pub use aggregate::{
    checkpoints, mean_ci95, paired_differences, run_experiment, AggregateRow, ExperimentResult, Metric,
};
pub use learner::{ActiveLearner, Applied};
pub use output::{write_aggregate, write_outputs, write_runtime_profile, write_trace};
pub use profile::{fit_power_law, runtime_profile, PowerLaw, ProfileRow};
pub use trial::{exhaust, run_trial, verify_corollary, ExhaustionReport, RoundRecord, SoundnessAudit, TrialTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub strategy: Strategy,
    /// Maximum number of oracle queries per trial.
    pub budget: usize,
    pub n_trials: usize,
    pub rng_seed: u64,
    pub split: SplitConfig,
    pub learners: LearnerConfig,
    /// Queries between test-set evaluations.
    pub eval_every: usize,
    /// Queries between retraining the strategy's model.
    pub retrain_every: usize,
    pub candidate_cap: Option<usize>,
    pub pruning: Pruning,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            strategy: Strategy::new(StrategyKind::LcRPlus, true),
            budget: 100,
            n_trials: 20,
            rng_seed: 0,
            split: SplitConfig::default(),
            learners: LearnerConfig::default(),
            eval_every: 1,
            retrain_every: 1,
            candidate_cap: None,
            pruning: Pruning::Pruned,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_trials == 0 {
            return Err(ExperimentError::Config("n_trials must be at least 1".into()));
        }
        if self.eval_every == 0 {
            return Err(ExperimentError::Config("eval_every must be at least 1".into()));
        }
        if self.retrain_every == 0 {
            return Err(ExperimentError::Config("retrain_every must be at least 1".into()));
        }
        if self.learners.committee_size == 0 {
            return Err(ExperimentError::Config("committee_size must be at least 1".into()));
        }
        if self.learners.forest.n_trees == 0 {
            return Err(ExperimentError::Config("forest.n_trees must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error("test split has a single class; AUC is undefined")]
    UndefinedAuc,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_fills_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"strategy":{"kind":"qbc","reason_on_update":false},"budget":7}"#).unwrap();
        assert_eq!(cfg.budget, 7);
        assert_eq!(cfg.strategy.display_name(), "QBC");
        assert_eq!(cfg.split.n_seeds, 20);
        assert_eq!(cfg.learners.forest.n_trees, 200);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_configs() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bugdet":3}"#).is_err());
        let cfg = ExperimentConfig {
            eval_every: 0,
            ..ExperimentConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ExperimentError::Config(_))));
    }
}
