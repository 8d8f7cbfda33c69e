use std::ops::Deref;
use std::time::Instant;

use crate::datasets::Pool;
use crate::learners::LearnerConfig;
use crate::order::{ClosureError, Deduction, Label, LabelSource, OrderClosure, Pair, Pruning};
use crate::rng::Rng;
use crate::strategies::{fit_risk, select, RiskTable, Selection, SelectionContext, Strategy, StrategyError};

use super::ExperimentError;

/// Labels newly added to `D_l` by one answer.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    /// Closure entries added by the answer, including the answered pair;
    /// empty when the learner does not reason.
    pub deductions: Vec<Deduction>,
    /// Pool pairs of `D` that became labeled.
    pub newly_labeled: usize,
    /// Wall time of the closure update in microseconds.
    pub insert_runtime_us: f64,
}

/// The labeled/unlabeled state of one active-learning run over the pairs
/// `D` of a pool.
///
/// With reasoning, every answer is closed under strict-order deduction and
/// `D_l` is `D` intersected with the closure; without it, `D_l` holds exactly
/// the answered pairs.
#[derive(Debug, Clone)]
pub struct ActiveLearner<P> {
    pool: P,
    strategy: Strategy,
    learners: LearnerConfig,
    candidate_cap: Option<usize>,
    closure: OrderClosure,
    in_d: Vec<bool>,
    label_of: Vec<Option<Label>>,
    labeled: Vec<(usize, Label)>,
    unlabeled_count: usize,
    n_seed_labels: usize,
    n_queried_labels: usize,
    n_queries: usize,
}

impl<P: Deref<Target = Pool>> ActiveLearner<P> {
    /// `d` lists the pool indices forming `D`.
    pub fn new(pool: P, strategy: Strategy, d: &[usize], learners: LearnerConfig, pruning: Pruning) -> Self {
        let n = pool.len();
        let mut in_d = vec![false; n];
        for &i in d {
            in_d[i] = true;
        }
        let unlabeled_count = in_d.iter().filter(|&&b| b).count();
        let closure = OrderClosure::new(pool.n_nodes()).with_pruning(pruning);
        ActiveLearner {
            pool,
            strategy,
            learners,
            candidate_cap: None,
            closure,
            in_d,
            label_of: vec![None; n],
            labeled: Vec::new(),
            unlabeled_count,
            n_seed_labels: 0,
            n_queried_labels: 0,
            n_queries: 0,
        }
    }

    pub fn with_candidate_cap(mut self, cap: Option<usize>) -> Self {
        self.candidate_cap = cap;
        self
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn reasons(&self) -> bool {
        self.strategy.reason_on_update()
    }

    /// The closure of all answers; empty when the learner does not reason.
    pub fn closure(&self) -> &OrderClosure {
        &self.closure
    }

    /// `|D_l ∩ D|`.
    pub fn labeled_count(&self) -> usize {
        self.labeled.len()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.unlabeled_count
    }

    pub fn queries(&self) -> usize {
        self.n_queries
    }

    /// Pairs of `D_l ∩ D` that were neither seeds nor queried.
    pub fn deduced_count(&self) -> usize {
        self.labeled.len() - self.n_seed_labels - self.n_queried_labels
    }

    /// `|H|`: labels held, inside or outside `D`.
    pub fn closure_size(&self) -> usize {
        if self.reasons() {
            self.closure.len()
        } else {
            self.labeled.len()
        }
    }

    pub fn label_of(&self, pool_index: usize) -> Option<Label> {
        self.label_of[pool_index]
    }

    pub fn is_labeled(&self, pair: Pair) -> bool {
        if self.reasons() {
            self.closure.contains(pair)
        } else {
            self.pool.index_of(pair).is_some_and(|i| self.label_of[i].is_some())
        }
    }

    /// `(pool index, label)` of `D_l ∩ D` in the order labels arrived.
    pub fn labeled(&self) -> &[(usize, Label)] {
        &self.labeled
    }

    /// `D_u` sorted by pair.
    pub fn unlabeled(&self) -> Vec<Pair> {
        let mut out: Vec<Pair> = (0..self.pool.len())
            .filter(|&i| self.in_d[i] && self.label_of[i].is_none())
            .map(|i| self.pool.pair(i))
            .collect();
        out.sort_unstable();
        out
    }

    /// Trains the strategy's model on `D_l ∩ D`.
    pub fn fit_risk(&self, seed: u64) -> Result<RiskTable, ExperimentError> {
        Ok(fit_risk(self.strategy.kind(), &self.pool, &self.labeled, &self.learners, seed)?)
    }

    /// Next query under `risk`, or `None` once `D_u` is empty.
    pub fn select(&self, risk: &RiskTable, rng: &mut Rng) -> Result<Option<Selection>, ExperimentError> {
        let du = self.unlabeled();
        if du.is_empty() {
            return Ok(None);
        }
        let mut ctx = SelectionContext::new(&self.pool, self.reasons().then_some(&self.closure), risk);
        ctx.candidate_cap = self.candidate_cap;
        match select(self.strategy, &du, &ctx, rng) {
            Ok(s) => Ok(Some(s)),
            Err(StrategyError::NoCandidates) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Records the answer `label` for `pair`. Seeds and queries differ only in
    /// the recorded source and the counters they feed.
    pub fn apply(&mut self, pair: Pair, label: Label, source: LabelSource) -> Result<Applied, ClosureError> {
        let answered_is_new = self
            .pool
            .index_of(pair)
            .is_some_and(|i| self.in_d[i] && self.label_of[i].is_none());
        let applied = if self.reasons() {
            let start = Instant::now();
            let delta = self.closure.insert(pair, label, source)?;
            let insert_runtime_us = start.elapsed().as_secs_f64() * 1e6;
            let mut newly = 0;
            for d in &delta.entries {
                if self.mark(d.pair, d.label) {
                    newly += 1;
                }
            }
            Applied {
                deductions: delta.entries,
                newly_labeled: newly,
                insert_runtime_us,
            }
        } else {
            if pair.is_reflexive() {
                return Err(ClosureError::Reflexive(pair));
            }
            Applied {
                deductions: Vec::new(),
                newly_labeled: usize::from(self.mark(pair, label)),
                insert_runtime_us: 0.0,
            }
        };
        match source {
            LabelSource::Seed if answered_is_new => self.n_seed_labels += 1,
            LabelSource::Queried => {
                self.n_queries += 1;
                if answered_is_new {
                    self.n_queried_labels += 1;
                }
            }
            _ => {}
        }
        Ok(applied)
    }

    /// Marks a pool pair of `D` as labeled; false if outside `D` or known.
    fn mark(&mut self, pair: Pair, label: Label) -> bool {
        let Some(i) = self.pool.index_of(pair) else {
            return false;
        };
        if !self.in_d[i] || self.label_of[i].is_some() {
            return false;
        }
        self.label_of[i] = Some(label);
        self.labeled.push((i, label));
        self.unlabeled_count -= 1;
        true
    }
}
