use rand::seq::SliceRandom;
use serde::Serialize;

use crate::datasets::{split, Pool};
use crate::learners::{auc, ForestModel, LearnerConfig};
use crate::order::{ClosureError, Label, LabelSource, OrderClosure, Pair, Pruning};
use crate::rng::{derive_seed, seeded, Rng};
use crate::strategies::Strategy;

use super::{ActiveLearner, Applied, ExperimentConfig, ExperimentError};

const SPLIT_STREAM: u64 = 0;
const SELECT_STREAM: u64 = 1;
const RISK_STREAM: u64 = 1 << 32;
const EVAL_STREAM: u64 = 2 << 32;

/// State after one round. Round 0 is the seed round and has no query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub query_index: usize,
    pub pair: Option<Pair>,
    pub label: Option<Label>,
    /// `|D_l ∩ D|`, seeds included.
    pub labeled_count: usize,
    /// Labels of `D_l ∩ D` obtained by deduction rather than asked.
    pub deduced_count: usize,
    /// Test AUC, present on evaluation rounds.
    pub auc: Option<f64>,
    pub insert_runtime_us: f64,
    /// `|H|` after the round.
    pub closure_size: usize,
}

/// Deduced labels checked against the ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SoundnessAudit {
    pub deduced_labels: usize,
    pub mismatches: usize,
}

impl SoundnessAudit {
    fn check(&mut self, pool: &Pool, applied: &Applied, answered: Pair) {
        for d in applied.deductions.iter().filter(|d| d.pair != answered) {
            self.deduced_labels += 1;
            if pool.truth().label(d.pair) != Ok(d.label) {
                self.mismatches += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &SoundnessAudit) {
        self.deduced_labels += other.deduced_labels;
        self.mismatches += other.mismatches;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialTrace {
    pub trial: usize,
    pub seed: u64,
    pub strategy: String,
    pub n_seeds: usize,
    pub records: Vec<RoundRecord>,
    pub soundness: SoundnessAudit,
    /// Fraction of test pairs whose label the final closure already implies.
    pub test_coverage: f64,
    /// `D_u` ran empty before the budget did.
    pub exhausted: bool,
}

impl TrialTrace {
    pub fn queries(&self) -> usize {
        self.records.last().map_or(0, |r| r.query_index)
    }
}

struct Evaluator<'a> {
    pool: &'a Pool,
    test: Vec<usize>,
    test_labels: Vec<Label>,
    learners: LearnerConfig,
    seed: u64,
}

impl Evaluator<'_> {
    /// AUC on the test split of a forest trained on `D_l ∩ D`. With no
    /// labels at all the classifier is uninformed and scores 0.5.
    fn auc(&self, labeled: &[(usize, Label)], round: usize) -> Result<f64, ExperimentError> {
        if labeled.is_empty() {
            return Ok(0.5);
        }
        let x: Vec<&[f64]> = labeled.iter().map(|&(i, _)| self.pool.features(i)).collect();
        let y: Vec<Label> = labeled.iter().map(|&(_, l)| l).collect();
        let forest = ForestModel::fit(&x, &y, &self.learners.forest, derive_seed(self.seed, EVAL_STREAM + round as u64))?;
        let scores = self
            .test
            .iter()
            .map(|&i| forest.score(self.pool.features(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(auc(&scores, &self.test_labels)?)
    }
}

/// One simulated run: split, seed, then query until the budget or `D_u` is
/// exhausted, with the pool's ground truth as the oracle.
pub fn run_trial(pool: &Pool, cfg: &ExperimentConfig, trial: usize, seed: u64) -> Result<TrialTrace, ExperimentError> {
    cfg.validate()?;
    let parts = split(pool, &cfg.split, derive_seed(seed, SPLIT_STREAM))?;
    let index = |p: &Pair| pool.index_of(*p).expect("split pairs come from the pool");
    let d: Vec<usize> = parts.train.iter().map(index).collect();
    let test: Vec<usize> = parts.test.iter().map(index).collect();
    let test_labels: Vec<Label> = test.iter().map(|&i| pool.label(i)).collect();
    let positives = test_labels.iter().filter(|l| l.is_positive()).count();
    if positives == 0 || positives == test_labels.len() {
        return Err(ExperimentError::UndefinedAuc);
    }
    let eval = Evaluator {
        pool,
        test,
        test_labels,
        learners: cfg.learners,
        seed,
    };

    let mut learner =
        ActiveLearner::new(pool, cfg.strategy, &d, cfg.learners, cfg.pruning).with_candidate_cap(cfg.candidate_cap);
    let mut soundness = SoundnessAudit::default();
    for &p in &parts.seed_pairs {
        let y = pool.label(index(&p));
        let applied = learner.apply(p, y, LabelSource::Seed)?;
        soundness.check(pool, &applied, p);
    }
    let mut records = vec![RoundRecord {
        query_index: 0,
        pair: None,
        label: None,
        labeled_count: learner.labeled_count(),
        deduced_count: learner.deduced_count(),
        auc: Some(eval.auc(learner.labeled(), 0)?),
        insert_runtime_us: 0.0,
        closure_size: learner.closure_size(),
    }];

    let mut rng = seeded(derive_seed(seed, SELECT_STREAM));
    let mut risk = None;
    let mut m = 0;
    while m < cfg.budget {
        if risk.is_none() || m % cfg.retrain_every == 0 {
            risk = Some(learner.fit_risk(derive_seed(seed, RISK_STREAM + m as u64))?);
        }
        let Some(sel) = learner.select(risk.as_ref().expect("risk fitted above"), &mut rng)? else {
            break;
        };
        let y = pool.label(index(&sel.pair));
        let applied = learner.apply(sel.pair, y, LabelSource::Queried)?;
        soundness.check(pool, &applied, sel.pair);
        m += 1;
        let last = m == cfg.budget || learner.unlabeled_count() == 0;
        let auc = if m % cfg.eval_every == 0 || last {
            Some(eval.auc(learner.labeled(), m)?)
        } else {
            None
        };
        records.push(RoundRecord {
            query_index: m,
            pair: Some(sel.pair),
            label: Some(y),
            labeled_count: learner.labeled_count(),
            deduced_count: learner.deduced_count(),
            auc,
            insert_runtime_us: applied.insert_runtime_us,
            closure_size: learner.closure_size(),
        });
    }

    let covered = parts.test.iter().filter(|&&p| learner.is_labeled(p)).count();
    Ok(TrialTrace {
        trial,
        seed,
        strategy: cfg.strategy.display_name(),
        n_seeds: parts.seed_pairs.len(),
        records,
        soundness,
        test_coverage: if parts.test.is_empty() {
            0.0
        } else {
            covered as f64 / parts.test.len() as f64
        },
        exhausted: learner.unlabeled_count() == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustionReport {
    pub queries: usize,
    pub positive_queries: usize,
    pub transitive_reduction: usize,
    pub soundness: SoundnessAudit,
    /// Every pool pair ended up labeled.
    pub complete: bool,
}

/// Queries every pool pair (directly or by deduction) with no seeds and no
/// budget limit, treating the whole pool as `D`.
pub fn exhaust(pool: &Pool, strategy: Strategy, learners: LearnerConfig, seed: u64) -> Result<ExhaustionReport, ExperimentError> {
    let d: Vec<usize> = (0..pool.len()).collect();
    let mut learner = ActiveLearner::new(pool, strategy, &d, learners, Pruning::Pruned);
    let mut rng: Rng = seeded(derive_seed(seed, SELECT_STREAM));
    let mut soundness = SoundnessAudit::default();
    let mut positive_queries = 0;
    let mut round = 0u64;
    loop {
        let risk = learner.fit_risk(derive_seed(seed, RISK_STREAM + round))?;
        let Some(sel) = learner.select(&risk, &mut rng)? else {
            break;
        };
        let y = pool.label(pool.index_of(sel.pair).expect("selected from the pool"));
        if y.is_positive() {
            positive_queries += 1;
        }
        let applied = learner.apply(sel.pair, y, LabelSource::Queried)?;
        soundness.check(pool, &applied, sel.pair);
        round += 1;
    }
    Ok(ExhaustionReport {
        queries: learner.queries(),
        positive_queries,
        transitive_reduction: pool.truth().transitive_reduction().len(),
        soundness,
        complete: learner.unlabeled_count() == 0,
    })
}

/// Closes `labels` in `k` orders (the given one, then `k - 1` shuffles) and
/// reports whether every order yields the same closure.
pub fn verify_corollary(n_nodes: usize, labels: &[(Pair, Label)], k: usize, rng: &mut Rng) -> Result<bool, ClosureError> {
    let reference = OrderClosure::seed(n_nodes, labels.iter().copied())?;
    let mut order = labels.to_vec();
    for _ in 1..k {
        order.shuffle(rng);
        if OrderClosure::seed(n_nodes, order.iter().copied())? != reference {
            return Ok(false);
        }
    }
    Ok(true)
}
