//! Randomized agreement checks between the incremental closure and the
//! fixpoint reference.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::closure::{OrderClosure, Pruning};
use super::fixpoint::brute_force_closure;
use super::truth::GroundTruth;
use super::types::{Label, LabelSource, Pair};

/// A random strict order and a label sequence answered by it.
#[derive(Debug, Clone)]
pub struct LabelCase {
    pub n: usize,
    pub truth: GroundTruth,
    pub labels: Vec<(Pair, Label)>,
}

impl LabelCase {
    /// `n` in `2..=max_nodes`, edge density uniform in `[0.1, 0.7]`, and up to
    /// `n(n-1)` labels (with repeats) drawn from all off-diagonal pairs.
    pub fn random<R: Rng + ?Sized>(max_nodes: usize, rng: &mut R) -> Self {
        let n = rng.random_range(2..=max_nodes.max(2));
        let density = rng.random_range(0.1..0.7);
        let truth = GroundTruth::random(n, density, rng);
        let all: Vec<Pair> = (0..n)
            .flat_map(|a| (0..n).map(move |b| Pair::new(a, b)))
            .filter(|p| !p.is_reflexive())
            .collect();
        let len = rng.random_range(1..=all.len());
        let labels = (0..len)
            .map(|_| {
                let p = *all.choose(rng).expect("n >= 2");
                (p, truth.label(p).expect("off-diagonal"))
            })
            .collect();
        LabelCase { n, truth, labels }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub cases: usize,
    pub mismatches: usize,
    pub incomplete: usize,
    pub unsound: usize,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.incomplete == 0 && self.unsound == 0
    }
}

/// Inserts each case label by label and compares the result with the fixpoint
/// closure, audits completeness, and checks every stored label against the
/// generating order.
pub fn check_cases<R: Rng + ?Sized>(n_cases: usize, max_nodes: usize, pruning: Pruning, rng: &mut R) -> CheckReport {
    let mut report = CheckReport::default();
    for _ in 0..n_cases {
        let case = LabelCase::random(max_nodes, rng);
        let mut h = OrderClosure::new(case.n).with_pruning(pruning);
        for &(p, y) in &case.labels {
            h.insert(p, y, LabelSource::Queried).expect("oracle labels are consistent");
        }
        let reference = brute_force_closure(case.n, case.labels.iter().copied()).expect("consistent");
        report.cases += 1;
        if h.positive_set() != reference.positives || h.negative_set() != reference.negatives {
            report.mismatches += 1;
        }
        if !h.audit().is_empty() {
            report.incomplete += 1;
        }
        if h.entries().iter().any(|&(p, y, _)| case.truth.label(p) != Ok(y)) {
            report.unsound += 1;
        }
    }
    report
}
