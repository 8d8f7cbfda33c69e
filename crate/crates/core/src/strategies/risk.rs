use crate::datasets::Pool;
use crate::learners::{Committee, LearnerConfig, LearnerError, LogisticModel};
use crate::order::Label;

use super::StrategyKind;

/// Per-pool-pair risk of each label: `risk(i, y)` is the cost the strategy
/// assigns to pool pair `i` ending up labeled `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    risk: Vec<[f64; 2]>,
}

impl RiskTable {
    pub fn constant(n_pairs: usize, value: f64) -> Self {
        RiskTable {
            risk: vec![[value; 2]; n_pairs],
        }
    }

    /// `1 - P(y)` from posteriors `P(+1)`.
    pub fn from_probabilities(p_positive: &[f64]) -> Self {
        RiskTable {
            risk: p_positive.iter().map(|&p| [p, 1.0 - p]).collect(),
        }
    }

    /// Members disagreeing with `y`, from per-pair `+1` vote counts.
    pub fn from_votes(positive_votes: &[usize], committee_size: usize) -> Self {
        RiskTable {
            risk: positive_votes
                .iter()
                .map(|&v| [v as f64, (committee_size - v) as f64])
                .collect(),
        }
    }

    /// Explicit `(risk of -1, risk of +1)` per pool pair.
    pub fn from_pairs(rows: &[(f64, f64)]) -> Self {
        RiskTable {
            risk: rows.iter().map(|&(neg, pos)| [neg, pos]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.risk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.risk.is_empty()
    }

    #[inline]
    pub fn get(&self, index: usize, label: Label) -> f64 {
        self.risk[index][label as usize]
    }
}

/// Trains the model a strategy needs on `labeled` (pool index, label) and
/// tabulates its risks over the whole pool. Without training data LC risks
/// are 0.5 and QBC risks are half the committee.
pub fn fit_risk(
    kind: StrategyKind,
    pool: &Pool,
    labeled: &[(usize, Label)],
    cfg: &LearnerConfig,
    seed: u64,
) -> Result<RiskTable, LearnerError> {
    let n = pool.len();
    let x: Vec<&[f64]> = labeled.iter().map(|&(i, _)| pool.features(i)).collect();
    let y: Vec<Label> = labeled.iter().map(|&(_, l)| l).collect();
    match kind {
        StrategyKind::Random | StrategyKind::Cnt => Ok(RiskTable::constant(n, 1.0)),
        StrategyKind::Lc | StrategyKind::LcRPlus => {
            if labeled.is_empty() {
                return Ok(RiskTable::constant(n, 0.5));
            }
            let model = LogisticModel::fit(&x, &y, &cfg.logistic)?;
            let probs: Vec<f64> = (0..n).map(|i| model.proba(pool.features(i))).collect();
            Ok(RiskTable::from_probabilities(&probs))
        }
        StrategyKind::Qbc | StrategyKind::QbcRPlus => {
            if labeled.is_empty() {
                return Ok(RiskTable::constant(n, cfg.committee_size as f64 / 2.0));
            }
            let committee = Committee::fit(&x, &y, cfg.committee_size, &cfg.committee_tree, seed)?;
            let votes: Vec<usize> = (0..n).map(|i| committee.positive_votes(pool.features(i))).collect();
            Ok(RiskTable::from_votes(&votes, committee.len()))
        }
    }
}
