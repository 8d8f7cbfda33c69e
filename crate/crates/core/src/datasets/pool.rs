use std::collections::HashSet;

use crate::order::{GroundTruth, Label, Pair};

use super::DatasetError;

/// Candidate pairs with feature vectors and the order that labels them.
#[derive(Debug, Clone)]
pub struct Pool {
    pairs: Vec<Pair>,
    dim: usize,
    features: Vec<f64>,
    truth: GroundTruth,
    index: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl Pool {
    pub fn new(truth: GroundTruth, pairs: Vec<Pair>, features: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        if pairs.len() != features.len() {
            return Err(DatasetError::Invalid(format!(
                "{} pairs but {} feature vectors",
                pairs.len(),
                features.len()
            )));
        }
        let dim = features.first().map_or(0, Vec::len);
        let n = truth.n_nodes();
        let mut flat = Vec::with_capacity(pairs.len() * dim);
        let mut index = vec![ABSENT; n * n];
        let mut seen = HashSet::with_capacity(pairs.len());
        for (i, (p, f)) in pairs.iter().zip(&features).enumerate() {
            if p.is_reflexive() {
                return Err(DatasetError::Invalid(format!("reflexive pair {p} in pool")));
            }
            if p.src.index() >= n || p.dst.index() >= n {
                return Err(DatasetError::Invalid(format!("pair {p} out of range for {n} nodes")));
            }
            if !seen.insert(*p) {
                return Err(DatasetError::Invalid(format!("duplicate pair {p} in pool")));
            }
            if f.len() != dim {
                return Err(DatasetError::Invalid(format!(
                    "pair {p} has {} features, expected {dim}",
                    f.len()
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(DatasetError::Invalid(format!("pair {p} has a non-finite feature")));
            }
            flat.extend_from_slice(f);
            index[p.src.index() * n + p.dst.index()] = i as u32;
        }
        Ok(Pool {
            pairs,
            dim,
            features: flat,
            truth,
            index,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.truth.n_nodes()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn pair(&self, i: usize) -> Pair {
        self.pairs[i]
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, pair: Pair) -> Option<usize> {
        let n = self.n_nodes();
        let (a, b) = (pair.src.index(), pair.dst.index());
        if a >= n || b >= n {
            return None;
        }
        match self.index[a * n + b] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    /// Index lookup without bounds checks on the node range; `a` and `b` must
    /// be valid node indices.
    #[inline]
    pub fn index_at(&self, a: usize, b: usize) -> Option<usize> {
        match self.index[a * self.n_nodes() + b] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    pub fn feature_of(&self, pair: Pair) -> Option<&[f64]> {
        self.index_of(pair).map(|i| self.features(i))
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    /// Ground-truth label of pool pair `i`.
    pub fn label(&self, i: usize) -> Label {
        Label::from_membership(self.truth.contains(self.pairs[i]))
    }

    pub fn positive_rate(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        let pos = (0..self.len()).filter(|&i| self.label(i).is_positive()).count();
        pos as f64 / self.len() as f64
    }
}
