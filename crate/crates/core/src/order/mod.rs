//! Strict-order reasoning: labeled-pair closure, its fixpoint reference,
//! ground-truth orders, transitive reduction and query bounds.

pub mod bits;
pub mod check;
pub mod closure;
pub mod dump;
pub mod fixpoint;
pub mod truth;
pub mod types;

pub use closure::{
    ClosureDelta, ClosureError, ConflictingLabel, Deduction, DeductionSets, DeltaSets, OrderClosure, Pruning, Violation,
};
pub use fixpoint::{brute_force_closure, FixpointClosure, FixpointError};
pub use truth::{is_strict_order, GroundTruth, QueryBounds, TruthError};
pub use types::{Label, LabelSource, NodeId, Pair, Rule};
