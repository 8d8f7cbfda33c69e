//! Closure by naive fixpoint iteration of the four completeness rules.
//!
//! This is deliberately the slowest possible formulation: explicit pair sets
//! and a full triple scan per round until nothing changes. It shares no code
//! with the incremental closure and serves as its reference.

use std::collections::BTreeSet;

use thiserror::Error;

use super::types::{Label, Pair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixpointError {
    #[error("pair {0} is reflexive")]
    Reflexive(Pair),
    #[error("labels are inconsistent: {0} is forced both ways")]
    Conflict(Pair),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixpointClosure {
    pub positives: BTreeSet<Pair>,
    pub negatives: BTreeSet<Pair>,
}

impl FixpointClosure {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Least set containing `labels` that is closed under
/// (i) `(a,b)+ (b,c)+ => (a,c)+`, (ii) `(a,b)+ (a,c)- => (b,c)-`,
/// (iii) `(b,c)+ (a,c)- => (a,b)-` and (iv) `(a,b)+ => (b,a)-`.
pub fn brute_force_closure<I>(n: usize, labels: I) -> Result<FixpointClosure, FixpointError>
where
    I: IntoIterator<Item = (Pair, Label)>,
{
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for (pair, label) in labels {
        if pair.is_reflexive() {
            return Err(FixpointError::Reflexive(pair));
        }
        match label {
            Label::Positive => pos.insert(pair),
            Label::Negative => neg.insert(pair),
        };
    }
    let nodes: Vec<Pair> = (0..n).flat_map(|a| (0..n).map(move |b| Pair::new(a, b))).collect();
    loop {
        let mut new_pos = Vec::new();
        let mut new_neg = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let ab = Pair::new(a, b);
                    let bc = Pair::new(b, c);
                    let ac = Pair::new(a, c);
                    if pos.contains(&ab) && pos.contains(&bc) && !pos.contains(&ac) {
                        new_pos.push(ac);
                    }
                    if pos.contains(&ab) && neg.contains(&ac) && !neg.contains(&bc) {
                        new_neg.push(bc);
                    }
                    if pos.contains(&bc) && neg.contains(&ac) && !neg.contains(&ab) {
                        new_neg.push(ab);
                    }
                }
            }
        }
        for p in &nodes {
            if pos.contains(p) && !neg.contains(&p.reversed()) {
                new_neg.push(p.reversed());
            }
        }
        let mut changed = false;
        for p in new_pos {
            if p.is_reflexive() {
                return Err(FixpointError::Conflict(p));
            }
            changed |= pos.insert(p);
        }
        for p in new_neg {
            if !p.is_reflexive() {
                changed |= neg.insert(p);
            }
        }
        if let Some(p) = pos.intersection(&neg).next() {
            return Err(FixpointError::Conflict(*p));
        }
        if !changed {
            break;
        }
    }
    Ok(FixpointClosure {
        positives: pos,
        negatives: neg,
    })
}
