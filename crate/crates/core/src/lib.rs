//! Pool-based active learning of strict partial orders.
//!
//! Labels on pairs of a finite set are kept closed under strict-order
//! deduction ([`order`]), query strategies score candidates by what each
//! answer would let the learner deduce ([`strategies`]), and a simulation
//! harness measures the resulting classifiers ([`experiment`]).


pub mod datasets;
pub mod experiment;
pub mod learners;
pub mod order;
pub mod rng;
pub mod strategies;

pub use order::{GroundTruth, Label, LabelSource, NodeId, OrderClosure, Pair, Rule};
