//! Query strategies.
//!
//! Every strategy except `Random` picks the candidate maximizing
//! `min_y F(S(y))`, where `S(y)` is the set of pool pairs that would become
//! labeled if the candidate were answered `y`, and `F` sums a per-pair risk
//! over that set. The plain strategies use `S(y) = {candidate}`; the
//! relational ones (`CNT`, `LC-R+`, `QBC-R+`) use the closure delta.

mod risk;
mod select;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learners::LearnerError;

pub use risk::{fit_risk, RiskTable};
pub use select::{
    score_candidate, score_cnt, score_lc, score_lcr, score_qbc, score_qbcr, select, BranchScore, Selection,
    SelectionContext, StrategyScore,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "lc")]
    Lc,
    #[serde(rename = "qbc")]
    Qbc,
    #[serde(rename = "cnt")]
    Cnt,
    #[serde(rename = "lc-r+")]
    LcRPlus,
    #[serde(rename = "qbc-r+")]
    QbcRPlus,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Random,
        StrategyKind::Lc,
        StrategyKind::Qbc,
        StrategyKind::Cnt,
        StrategyKind::LcRPlus,
        StrategyKind::QbcRPlus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Lc => "lc",
            StrategyKind::Qbc => "qbc",
            StrategyKind::Cnt => "cnt",
            StrategyKind::LcRPlus => "lc-r+",
            StrategyKind::QbcRPlus => "qbc-r+",
        }
    }

    /// Scores candidates through hypothetical closure deltas.
    pub fn is_relational(self) -> bool {
        matches!(self, StrategyKind::Cnt | StrategyKind::LcRPlus | StrategyKind::QbcRPlus)
    }

    pub fn uses_logistic(self) -> bool {
        matches!(self, StrategyKind::Lc | StrategyKind::LcRPlus)
    }

    pub fn uses_committee(self) -> bool {
        matches!(self, StrategyKind::Qbc | StrategyKind::QbcRPlus)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?}; expected one of random, lc, qbc, cnt, lc-r+, qbc-r+")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

/// A strategy kind plus whether answers are closed under deduction before
/// the next round. Relational kinds always reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "StrategyRepr", into = "StrategyRepr")]
pub struct Strategy {
    kind: StrategyKind,
    reason_on_update: bool,
}

#[derive(Serialize, Deserialize)]
struct StrategyRepr {
    kind: StrategyKind,
    #[serde(default = "yes")]
    reason_on_update: bool,
}

fn yes() -> bool {
    true
}

impl From<StrategyRepr> for Strategy {
    fn from(r: StrategyRepr) -> Self {
        Strategy::new(r.kind, r.reason_on_update)
    }
}

impl From<Strategy> for StrategyRepr {
    fn from(s: Strategy) -> Self {
        StrategyRepr {
            kind: s.kind,
            reason_on_update: s.reason_on_update,
        }
    }
}

impl Strategy {
    pub fn new(kind: StrategyKind, reason_on_update: bool) -> Self {
        Strategy {
            kind,
            reason_on_update: reason_on_update || kind.is_relational(),
        }
    }

    pub fn kind(self) -> StrategyKind {
        self.kind
    }

    pub fn reason_on_update(self) -> bool {
        self.reason_on_update
    }

    /// Name as used in result tables: `LC`, `LC-R`, `LC-R+`, `CNT`, ...
    pub fn display_name(self) -> String {
        let base = match self.kind {
            StrategyKind::Random => "Random",
            StrategyKind::Lc => "LC",
            StrategyKind::Qbc => "QBC",
            StrategyKind::Cnt => return "CNT".into(),
            StrategyKind::LcRPlus => return "LC-R+".into(),
            StrategyKind::QbcRPlus => return "QBC-R+".into(),
        };
        if self.reason_on_update {
            format!("{base}-R")
        } else {
            base.into()
        }
    }

    /// Inverse of [`display_name`](Self::display_name), case-insensitive.
    pub fn from_display_name(name: &str) -> Option<Strategy> {
        let lower = name.trim().to_ascii_lowercase();
        for kind in StrategyKind::ALL {
            for reason in [false, true] {
                let s = Strategy::new(kind, reason);
                if s.display_name().to_ascii_lowercase() == lower {
                    return Some(s);
                }
            }
        }
        None
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("no candidate pairs to choose from")]
    NoCandidates,
    #[error("every candidate's label is already forced by the closure")]
    NoConsistentCandidate,
    #[error("strategy {0} needs a closure")]
    MissingClosure(StrategyKind),
    #[error("risk table covers {table} pairs but the pool has {pool}")]
    RiskTableSize { table: usize, pool: usize },
    #[error("candidate {0} is not in the pool")]
    NotInPool(crate::order::Pair),
    #[error(transparent)]
    Closure(#[from] crate::order::ClosureError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}
