use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;

use crate::datasets::Pool;
use crate::learners::{Committee, LogisticModel};
use crate::order::{ClosureError, Label, OrderClosure, Pair};
use crate::rng::Rng;

use super::{RiskTable, Strategy, StrategyError, StrategyKind};

/// Everything a selection round reads. All fields are shared immutably, so
/// candidates can be scored concurrently.
#[derive(Debug, Clone, Copy)]
pub struct SelectionContext<'a> {
    pub pool: &'a Pool,
    /// Current labeled closure; required by relational kinds.
    pub closure: Option<&'a OrderClosure>,
    pub risk: &'a RiskTable,
    /// Score relational kinds as if no deduction were possible, i.e. with
    /// `S(y)` equal to the candidate alone.
    pub singleton_hypotheses: bool,
    /// Score a uniform subsample of at most this many candidates.
    pub candidate_cap: Option<usize>,
}

impl<'a> SelectionContext<'a> {
    pub fn new(pool: &'a Pool, closure: Option<&'a OrderClosure>, risk: &'a RiskTable) -> Self {
        SelectionContext {
            pool,
            closure,
            risk,
            singleton_hypotheses: false,
            candidate_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub pair: Pair,
    /// `min_y F(S(y))` of the chosen pair; zero for `Random`.
    pub value: f64,
    /// Number of candidates scored.
    pub scored: usize,
}

/// One hypothesis of a candidate: the pool pairs it would label and their
/// summed risk.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchScore {
    pub label: Label,
    pub value: f64,
    pub inferred: Vec<(Pair, Label)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyScore {
    pub pair: Pair,
    /// Minimum over the consistent branches; `None` if both conflict.
    pub value: Option<f64>,
    /// Consistent branches only.
    pub per_label: Vec<BranchScore>,
}

fn is_conflict(e: &ClosureError) -> bool {
    matches!(e, ClosureError::Conflict(_))
}

impl SelectionContext<'_> {
    fn pool_index(&self, p: Pair) -> Result<usize, StrategyError> {
        self.pool.index_of(p).ok_or(StrategyError::NotInPool(p))
    }

    fn deduces(&self, kind: StrategyKind) -> bool {
        kind.is_relational() && !self.singleton_hypotheses
    }

    /// `F(S(y))`, or `None` when the closure already forces the other label.
    fn branch_value(&self, kind: StrategyKind, p: Pair, index: usize, y: Label) -> Result<Option<f64>, StrategyError> {
        if !self.deduces(kind) {
            return Ok(Some(self.risk.get(index, y)));
        }
        let closure = self.closure.ok_or(StrategyError::MissingClosure(kind))?;
        let sets = match closure.hypothetical_sets(p, y) {
            Ok(s) => s,
            Err(e) if is_conflict(&e) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut total = 0.0;
        for (matrix, label) in [(&sets.positives, Label::Positive), (&sets.negatives, Label::Negative)] {
            for (u, v) in matrix.iter() {
                if let Some(i) = self.pool.index_at(u, v) {
                    total += self.risk.get(i, label);
                }
            }
        }
        Ok(Some(total))
    }

    fn candidate_value(&self, kind: StrategyKind, p: Pair) -> Result<Option<f64>, StrategyError> {
        let index = self.pool_index(p)?;
        let mut best: Option<f64> = None;
        for y in Label::BOTH {
            if let Some(v) = self.branch_value(kind, p, index, y)? {
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        Ok(best)
    }
}

/// Picks the next query from `du`. `Random` draws uniformly; the other kinds
/// take the argmax of `min_y F(S(y))`, breaking ties towards the smallest
/// pair.
pub fn select(
    strategy: Strategy,
    du: &[Pair],
    ctx: &SelectionContext<'_>,
    rng: &mut Rng,
) -> Result<Selection, StrategyError> {
    if du.is_empty() {
        return Err(StrategyError::NoCandidates);
    }
    if ctx.risk.len() != ctx.pool.len() {
        return Err(StrategyError::RiskTableSize {
            table: ctx.risk.len(),
            pool: ctx.pool.len(),
        });
    }
    let kind = strategy.kind();
    if kind == StrategyKind::Random {
        let pair = du[rng.random_range(0..du.len())];
        return Ok(Selection {
            pair,
            value: 0.0,
            scored: 1,
        });
    }
    let subset: Vec<Pair>;
    let candidates: &[Pair] = match ctx.candidate_cap {
        Some(cap) if cap < du.len() => {
            let mut keep = index::sample(rng, du.len(), cap.max(1)).into_vec();
            keep.sort_unstable();
            subset = keep.into_iter().map(|i| du[i]).collect();
            &subset
        }
        _ => du,
    };
    let values: Vec<Option<f64>> = candidates
        .par_iter()
        .map(|&p| ctx.candidate_value(kind, p))
        .collect::<Result<_, _>>()?;
    let mut best: Option<(f64, Pair)> = None;
    for (&p, v) in candidates.iter().zip(values) {
        let Some(v) = v else { continue };
        let better = match best {
            None => true,
            Some((bv, bp)) => v > bv || (v == bv && p < bp),
        };
        if better {
            best = Some((v, p));
        }
    }
    let (value, pair) = best.ok_or(StrategyError::NoConsistentCandidate)?;
    Ok(Selection {
        pair,
        value,
        scored: candidates.len(),
    })
}

/// Full per-branch breakdown for one candidate.
pub fn score_candidate(
    strategy: Strategy,
    p: Pair,
    ctx: &SelectionContext<'_>,
) -> Result<StrategyScore, StrategyError> {
    let kind = strategy.kind();
    let index = ctx.pool_index(p)?;
    let mut per_label = Vec::new();
    for y in Label::BOTH {
        let inferred: Vec<(Pair, Label)> = if ctx.deduces(kind) {
            let closure = ctx.closure.ok_or(StrategyError::MissingClosure(kind))?;
            match closure.hypothetical_delta(p, y) {
                Ok(delta) => delta
                    .entries
                    .iter()
                    .filter(|d| ctx.pool.index_of(d.pair).is_some())
                    .map(|d| (d.pair, d.label))
                    .collect(),
                Err(e) if is_conflict(&e) => continue,
                Err(e) => return Err(e.into()),
            }
        } else {
            vec![(p, y)]
        };
        let value = match ctx.branch_value(kind, p, index, y)? {
            Some(v) => v,
            None => continue,
        };
        per_label.push(BranchScore { label: y, value, inferred });
    }
    let value = per_label.iter().map(|b| b.value).reduce(f64::min);
    Ok(StrategyScore {
        pair: p,
        value,
        per_label,
    })
}

/// `1 - P(y | x)`.
pub fn score_lc(model: &LogisticModel, x: &[f64], y: Label) -> f64 {
    let p = model.proba(x);
    match y {
        Label::Positive => 1.0 - p,
        Label::Negative => p,
    }
}

/// Committee members whose vote differs from `y`.
pub fn score_qbc(committee: &Committee, x: &[f64], y: Label) -> usize {
    let pos = committee.positive_votes(x);
    match y {
        Label::Positive => committee.len() - pos,
        Label::Negative => pos,
    }
}

/// Pool pairs the hypothesis `(p, y)` would label, with their inferred
/// labels. Empty when the closure already forces the other label.
fn inferred_in_pool(h: &OrderClosure, pool: &Pool, p: Pair, y: Label) -> Vec<(usize, Label)> {
    match h.hypothetical_delta(p, y) {
        Ok(delta) => delta
            .entries
            .iter()
            .filter_map(|d| pool.index_of(d.pair).map(|i| (i, d.label)))
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// `|S(y)|`: pool pairs newly labeled by the hypothesis.
pub fn score_cnt(h: &OrderClosure, pool: &Pool, p: Pair, y: Label) -> usize {
    inferred_in_pool(h, pool, p, y).len()
}

/// Sum of `1 - P(inferred label)` over `S(y)`.
pub fn score_lcr(h: &OrderClosure, pool: &Pool, model: &LogisticModel, p: Pair, y: Label) -> f64 {
    inferred_in_pool(h, pool, p, y)
        .into_iter()
        .map(|(i, l)| score_lc(model, pool.features(i), l))
        .sum()
}

/// Sum over `S(y)` of the members disagreeing with the inferred label.
pub fn score_qbcr(h: &OrderClosure, pool: &Pool, committee: &Committee, p: Pair, y: Label) -> usize {
    inferred_in_pool(h, pool, p, y)
        .into_iter()
        .map(|(i, l)| score_qbc(committee, pool.features(i), l))
        .sum()
}
