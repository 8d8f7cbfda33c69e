//! One labeling session: the learner state, the served query and the log.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use orderlearn::datasets::Pool;
use orderlearn::experiment::ActiveLearner;
use orderlearn::learners::LearnerConfig;
use orderlearn::order::dump::dump_string;
use orderlearn::order::{
    ClosureError, ConflictingLabel, Label, LabelSource, OrderClosure, Pair, Pruning, QueryBounds, Rule,
};
use orderlearn::rng::{derive_seed, seeded};
use orderlearn::strategies::{Strategy, StrategyKind};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::catalog::Dataset;
use crate::error::ServiceError;
use crate::log::{read_log, EventSource, LabelEvent, LabelLog};

const SEED_STREAM: u64 = 0;
const SELECT_STREAM: u64 = 1;
const RISK_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Exhausted,
    Conflicted,
}

/// Everything needed to rebuild a session from its log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub id: String,
    pub dataset: String,
    pub strategy: StrategyKind,
    pub budget: usize,
    #[serde(default)]
    pub n_seeds: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SessionMeta {
    pub fn meta_path(&self, logs_dir: &Path) -> PathBuf {
        logs_dir.join(format!("{}.json", self.id))
    }

    pub fn log_path(&self, logs_dir: &Path) -> PathBuf {
        logs_dir.join(format!("{}.jsonl", self.id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub status: Status,
    pub strategy: String,
    pub budget: usize,
    pub queries_used: usize,
    pub budget_remaining: usize,
    /// Labels held by the closure: seeds, answers and deductions.
    pub labeled_total: usize,
    pub seed_total: usize,
    pub deduced_total: usize,
    /// Unlabeled pool pairs.
    pub remaining: usize,
    pub deduced_by_rule: BTreeMap<Rule, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<QueryBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conflict: Option<ConflictingLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Query {
    pub src: u32,
    pub dst: u32,
    pub src_name: String,
    pub dst_name: String,
    /// Index the answer will carry in the log.
    pub query_index: usize,
    pub budget_remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Submitted {
    pub accepted: bool,
    pub deduced: Vec<LabelEvent>,
    pub stats: Stats,
}

#[derive(Debug)]
pub struct Session {
    meta: SessionMeta,
    dataset: Arc<Dataset>,
    learner: ActiveLearner<Arc<Pool>>,
    log: LabelLog,
    /// Cached selection for the current state; `Some(None)` when exhausted.
    served: Option<Option<Pair>>,
    seed_labels: usize,
    conflict: Option<ConflictingLabel>,
}

fn learner_for(meta: &SessionMeta, dataset: &Dataset) -> ActiveLearner<Arc<Pool>> {
    let d: Vec<usize> = (0..dataset.pool.len()).collect();
    ActiveLearner::new(
        Arc::clone(&dataset.pool),
        Strategy::new(meta.strategy, true),
        &d,
        LearnerConfig::default(),
        Pruning::Pruned,
    )
}

impl Session {
    /// Starts a session, labels `meta.n_seeds` random pool pairs from the
    /// dataset's ground truth, and writes the metadata and the seed events.
    pub fn create(meta: SessionMeta, dataset: Arc<Dataset>, logs_dir: &Path) -> Result<Self, ServiceError> {
        if meta.n_seeds > dataset.pool.len() {
            return Err(ServiceError::BadRequest(format!(
                "{} seeds requested from a pool of {} pairs",
                meta.n_seeds,
                dataset.pool.len()
            )));
        }
        std::fs::write(meta.meta_path(logs_dir), serde_json::to_vec_pretty(&meta)?)?;
        let log = LabelLog::open(&meta.log_path(logs_dir))?;
        let mut session = Session {
            learner: learner_for(&meta, &dataset),
            meta,
            dataset,
            log,
            served: None,
            seed_labels: 0,
            conflict: None,
        };
        let pool = Arc::clone(&session.dataset.pool);
        let mut rng = seeded(derive_seed(session.meta.seed, SEED_STREAM));
        let picks = index::sample(&mut rng, pool.len(), session.meta.n_seeds).into_vec();
        for i in picks {
            let pair = pool.pair(i);
            if session.learner.is_labeled(pair) {
                continue;
            }
            session.answer(pair, pool.label(i), EventSource::Seed)?;
        }
        Ok(session)
    }

    /// Rebuilds a session from its metadata and log, then reopens the log
    /// for appending.
    pub fn replay(meta: SessionMeta, dataset: Arc<Dataset>, logs_dir: &Path) -> Result<Self, ServiceError> {
        let log_path = meta.log_path(logs_dir);
        let events = if log_path.exists() { read_log(&log_path)? } else { Vec::new() };
        let mut learner = learner_for(&meta, &dataset);
        let mut seed_labels = 0;
        let mut conflict = None;
        let mut logged_deductions = BTreeMap::new();
        for e in &events {
            let pair = e.pair();
            match e.source {
                EventSource::Seed | EventSource::Human => {
                    check_pair(&dataset.pool, pair)?;
                    if conflict.is_some() {
                        return Err(ServiceError::LogMismatch(format!("answer for {pair} after a conflict")));
                    }
                    let (source, expected_index) = if e.source == EventSource::Seed {
                        seed_labels += 1;
                        (LabelSource::Seed, 0)
                    } else {
                        (LabelSource::Queried, learner.queries() + 1)
                    };
                    if e.query_index != expected_index {
                        return Err(ServiceError::LogMismatch(format!(
                            "answer for {pair} has query_index {}, expected {expected_index}",
                            e.query_index
                        )));
                    }
                    learner
                        .apply(pair, e.label, source)
                        .map_err(|err| ServiceError::LogMismatch(format!("answer for {pair}: {err}")))?;
                }
                EventSource::Deduced => {
                    logged_deductions.insert(pair, e.label);
                }
                EventSource::Rejected => {
                    let found = learner.closure().hypothetical_delta(pair, e.label);
                    match found {
                        Err(ClosureError::Conflict(c)) => conflict = Some(c),
                        _ => {
                            return Err(ServiceError::LogMismatch(format!(
                                "rejected answer for {pair} does not conflict"
                            )))
                        }
                    }
                }
            }
        }
        for (pair, label) in &logged_deductions {
            if learner.closure().label(*pair) != Some(*label) {
                return Err(ServiceError::LogMismatch(format!("logged deduction {pair} is not implied")));
            }
        }
        let log = LabelLog::open(&log_path)?;
        Ok(Session {
            meta,
            dataset,
            learner,
            log,
            served: None,
            seed_labels,
            conflict,
        })
    }

    pub fn meta(&self) -> &SessionMeta {
        &self.meta
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn closure(&self) -> &OrderClosure {
        self.learner.closure()
    }

    pub fn log_path(&self) -> &Path {
        self.log.path()
    }

    /// JSON-lines dump of the closure, sorted by pair.
    pub fn dump(&self) -> String {
        dump_string(self.learner.closure())
    }

    pub fn status(&self) -> Status {
        if self.conflict.is_some() {
            Status::Conflicted
        } else if self.learner.queries() >= self.meta.budget || self.learner.unlabeled_count() == 0 {
            Status::Exhausted
        } else {
            Status::Active
        }
    }

    /// The strategy's choice for the current state. Selection is seeded by
    /// the query count, so repeated calls agree even across replays.
    pub fn next_query(&mut self) -> Result<Option<Query>, ServiceError> {
        let pair = self.current()?;
        Ok(pair.map(|p| Query {
            src: p.src.0,
            dst: p.dst.0,
            src_name: self.dataset.name_of(p.src),
            dst_name: self.dataset.name_of(p.dst),
            query_index: self.learner.queries() + 1,
            budget_remaining: self.meta.budget - self.learner.queries(),
        }))
    }

    fn current(&mut self) -> Result<Option<Pair>, ServiceError> {
        match self.status() {
            Status::Conflicted => return Err(ServiceError::Halted),
            Status::Exhausted => return Ok(None),
            Status::Active => {}
        }
        if let Some(cached) = self.served {
            return Ok(cached);
        }
        let m = self.learner.queries() as u64;
        let risk = self.learner.fit_risk(derive_seed(self.meta.seed, RISK_STREAM + m))?;
        let mut rng = seeded(derive_seed(derive_seed(self.meta.seed, SELECT_STREAM), m));
        let pair = self.learner.select(&risk, &mut rng)?.map(|s| s.pair);
        self.served = Some(pair);
        Ok(pair)
    }

    /// Accepts the answer to the served query. A label for any other pair is
    /// stale, unless it contradicts what the closure already holds, in which
    /// case the session halts.
    pub fn submit(&mut self, pair: Pair, label: Label) -> Result<Submitted, ServiceError> {
        let served = self.current()?;
        let Some(expected) = served else {
            return Err(ServiceError::Exhausted);
        };
        if pair != expected {
            return match self.learner.closure().hypothetical_delta(pair, label) {
                Err(ClosureError::Conflict(c)) => Err(self.halt(pair, label, c)),
                _ => Err(ServiceError::StalePair {
                    expected: Some(expected),
                    got: pair,
                }),
            };
        }
        let deduced = self.answer(pair, label, EventSource::Human)?;
        Ok(Submitted {
            accepted: true,
            deduced,
            stats: self.stats(),
        })
    }

    fn halt(&mut self, pair: Pair, label: Label, conflict: ConflictingLabel) -> ServiceError {
        let event = LabelEvent::new(pair, label, EventSource::Rejected, self.learner.queries());
        if let Err(e) = self.log.append(&[event]) {
            return e;
        }
        self.conflict = Some(conflict.clone());
        self.served = None;
        ServiceError::Conflict(conflict)
    }

    /// Logs the answer with its deductions, then applies it.
    fn answer(&mut self, pair: Pair, label: Label, source: EventSource) -> Result<Vec<LabelEvent>, ServiceError> {
        let delta = match self.learner.closure().hypothetical_delta(pair, label) {
            Ok(d) => d,
            Err(ClosureError::Conflict(c)) => return Err(self.halt(pair, label, c)),
            Err(e) => return Err(ServiceError::BadRequest(e.to_string())),
        };
        let (query_index, label_source) = match source {
            EventSource::Seed => (0, LabelSource::Seed),
            _ => (self.learner.queries() + 1, LabelSource::Queried),
        };
        let deduced: Vec<LabelEvent> = delta.deduced().map(|d| LabelEvent::deduced(d, query_index)).collect();
        let mut events = Vec::with_capacity(deduced.len() + 1);
        events.push(LabelEvent::new(pair, label, source, query_index));
        events.extend(deduced.iter().cloned());
        self.log.append(&events)?;
        self.learner
            .apply(pair, label, label_source)
            .expect("the delta was computed on this closure");
        if source == EventSource::Seed {
            self.seed_labels += 1;
        }
        self.served = None;
        Ok(deduced)
    }

    pub fn stats(&self) -> Stats {
        let closure = self.learner.closure();
        let mut deduced_by_rule = BTreeMap::new();
        for (src, count) in closure.source_counts() {
            if let LabelSource::Deduced(rule) = src {
                deduced_by_rule.insert(rule, count);
            }
        }
        let truth = self.dataset.pool.truth();
        Stats {
            status: self.status(),
            strategy: self.meta.strategy.as_str().to_string(),
            budget: self.meta.budget,
            queries_used: self.learner.queries(),
            budget_remaining: self.meta.budget.saturating_sub(self.learner.queries()),
            labeled_total: closure.len(),
            seed_total: self.seed_labels,
            deduced_total: deduced_by_rule.values().sum(),
            remaining: self.learner.unlabeled_count(),
            deduced_by_rule,
            bounds: (!truth.is_empty()).then(|| truth.query_bounds()),
            conflict: self.conflict.clone(),
        }
    }
}

fn check_pair(pool: &Pool, pair: Pair) -> Result<(), ServiceError> {
    if pool.index_of(pair).is_none() {
        return Err(ServiceError::LogMismatch(format!("{pair} is not a pair of the dataset")));
    }
    Ok(())
}

/// Closure obtained by applying the answer events of a log in the given
/// order, ignoring deductions and rejections.
pub fn replay_closure(pool: &Pool, events: &[LabelEvent]) -> Result<OrderClosure, ServiceError> {
    let mut closure = OrderClosure::new(pool.n_nodes());
    for e in events.iter().filter(|e| e.is_answer()) {
        check_pair(pool, e.pair())?;
        let source = if e.source == EventSource::Seed {
            LabelSource::Seed
        } else {
            LabelSource::Queried
        };
        closure
            .insert(e.pair(), e.label, source)
            .map_err(|err| ServiceError::LogMismatch(format!("answer for {}: {err}", e.pair())))?;
    }
    Ok(closure)
}
