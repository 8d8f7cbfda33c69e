use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::bits::{self, BitMatrix};
use super::closure::OrderClosure;
use super::types::{Label, NodeId, Pair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruthError {
    #[error("pair {0} is reflexive")]
    Reflexive(Pair),
    #[error("node {node} out of range for {n} nodes")]
    OutOfRange { node: NodeId, n: usize },
    #[error("edges contain a cycle through node {0}")]
    Cycle(NodeId),
}

/// True iff `pairs` is irreflexive, transitive and asymmetric.
pub fn is_strict_order<'a, I>(pairs: I) -> bool
where
    I: IntoIterator<Item = &'a Pair>,
{
    let set: HashSet<Pair> = pairs.into_iter().copied().collect();
    if set.iter().any(|p| p.is_reflexive() || set.contains(&p.reversed())) {
        return false;
    }
    for ab in &set {
        for bc in &set {
            if ab.dst == bc.src && !set.contains(&Pair::new(ab.src, bc.dst)) {
                return false;
            }
        }
    }
    true
}

/// A strict order over `n` nodes, stored transitively closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    closed: BitMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueryBounds {
    pub lower: usize,
    pub upper: usize,
}

impl GroundTruth {
    /// Builds the order generated by `edges`. Accepts either a reduced DAG or
    /// an already closed relation; the result is the same.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, TruthError>
    where
        I: IntoIterator<Item = Pair>,
    {
        let mut closed = BitMatrix::new(n);
        for e in edges {
            for node in [e.src, e.dst] {
                if node.index() >= n {
                    return Err(TruthError::OutOfRange { node, n });
                }
            }
            if e.is_reflexive() {
                return Err(TruthError::Reflexive(e));
            }
            closed.insert(e.src.index(), e.dst.index());
        }
        // Warshall over bit rows.
        for k in 0..n {
            let row_k = closed.row(k).to_vec();
            for i in 0..n {
                if closed.contains(i, k) {
                    closed.or_row(i, &row_k);
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| closed.contains(i, i)) {
            return Err(TruthError::Cycle(NodeId::from(i)));
        }
        Ok(GroundTruth { closed })
    }

    /// Random strict order: nodes are placed in a random total order and each
    /// forward pair becomes an edge with probability `edge_prob`.
    pub fn random<R: Rng + ?Sized>(n: usize, edge_prob: f64, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < edge_prob {
                    edges.push(Pair::new(perm[i], perm[j]));
                }
            }
        }
        GroundTruth::from_edges(n, edges).expect("forward edges are acyclic")
    }

    pub fn n_nodes(&self) -> usize {
        self.closed.dim()
    }

    /// Number of pairs in the (closed) relation.
    pub fn len(&self) -> usize {
        self.closed.count()
    }

    pub fn is_empty(&self) -> bool {
        self.closed.is_empty()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        let n = self.n_nodes();
        pair.src.index() < n && pair.dst.index() < n && self.closed.contains(pair.src.index(), pair.dst.index())
    }

    pub fn relation(&self) -> impl Iterator<Item = Pair> + '_ {
        self.closed.iter().map(|(a, b)| Pair::new(a, b))
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.closed
    }

    /// Simulated oracle answer. Undefined on the diagonal.
    pub fn label(&self, pair: Pair) -> Result<Label, TruthError> {
        if pair.is_reflexive() {
            return Err(TruthError::Reflexive(pair));
        }
        let n = self.n_nodes();
        for node in [pair.src, pair.dst] {
            if node.index() >= n {
                return Err(TruthError::OutOfRange { node, n });
            }
        }
        Ok(Label::from_membership(self.contains(pair)))
    }

    /// Nodes that take part in at least one pair of the relation.
    pub fn active_nodes(&self) -> Vec<NodeId> {
        let n = self.n_nodes();
        (0..n)
            .filter(|&i| bits::ones(self.closed.row(i)).next().is_some() || (0..n).any(|j| self.closed.contains(j, i)))
            .map(NodeId::from)
            .collect()
    }

    /// Minimal edge set with the same reachability: `(u,v)` survives unless
    /// some `w` has `(u,w)` and `(w,v)` in the relation.
    pub fn transitive_reduction(&self) -> BTreeSet<Pair> {
        let m = &self.closed;
        m.iter()
            .filter(|&(u, v)| !bits::ones(m.row(u)).any(|w| m.contains(w, v)))
            .map(|(u, v)| Pair::new(u, v))
            .collect()
    }

    /// Lower and upper bounds on the number of queries a consistent learner
    /// needs: the size of the transitive reduction and the size of the full
    /// closure (positives plus the negatives they imply).
    pub fn query_bounds(&self) -> QueryBounds {
        let closure = OrderClosure::seed(self.n_nodes(), self.relation().map(|p| (p, Label::Positive)))
            .expect("a strict order is self-consistent");
        QueryBounds {
            lower: self.transitive_reduction().len(),
            upper: closure.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(a: u32, b: u32) -> Pair {
        Pair::new(a, b)
    }

    fn chain() -> GroundTruth {
        // 1->2->3 plus 4->5, closed on load
        GroundTruth::from_edges(6, [p(1, 2), p(2, 3), p(4, 5)]).unwrap()
    }

    #[test]
    fn strict_order_check() {
        assert!(is_strict_order(&[]));
        assert!(is_strict_order(&[p(1, 2), p(2, 3), p(1, 3)]));
        assert!(!is_strict_order(&[p(1, 2), p(2, 3)]));
        assert!(!is_strict_order(&[p(1, 1)]));
        assert!(!is_strict_order(&[p(1, 2), p(2, 1)]));
    }

    #[test]
    fn oracle_answers() {
        let g = chain();
        assert_eq!(g.label(p(1, 3)), Ok(Label::Positive));
        assert_eq!(g.label(p(3, 1)), Ok(Label::Negative));
        assert_eq!(g.label(p(1, 4)), Ok(Label::Negative));
        assert_eq!(g.label(p(2, 2)), Err(TruthError::Reflexive(p(2, 2))));
    }

    #[test]
    fn loading_is_idempotent() {
        let g = chain();
        let again = GroundTruth::from_edges(6, g.relation()).unwrap();
        assert_eq!(g, again);
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn cycles_are_rejected() {
        assert!(matches!(
            GroundTruth::from_edges(3, [p(0, 1), p(1, 2), p(2, 0)]),
            Err(TruthError::Cycle(_))
        ));
    }

    #[test]
    fn reduction_and_bounds() {
        let g = GroundTruth::from_edges(4, [p(1, 2), p(2, 3), p(1, 3)]).unwrap();
        assert_eq!(g.transitive_reduction(), [p(1, 2), p(2, 3)].into_iter().collect());
        assert_eq!(g.query_bounds(), QueryBounds { lower: 2, upper: 6 });

        let empty = GroundTruth::from_edges(3, []).unwrap();
        assert!(empty.transitive_reduction().is_empty());
        assert_eq!(empty.query_bounds(), QueryBounds { lower: 0, upper: 0 });

        let single = GroundTruth::from_edges(3, [p(1, 2)]).unwrap();
        assert_eq!(single.transitive_reduction(), [p(1, 2)].into_iter().collect());
        assert_eq!(single.query_bounds(), QueryBounds { lower: 1, upper: 2 });
    }

    #[test]
    fn random_orders_are_strict() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = GroundTruth::random(9, 0.4, &mut rng);
            let rel: Vec<Pair> = g.relation().collect();
            assert!(is_strict_order(&rel));
            let b = g.query_bounds();
            assert!(b.lower <= b.upper);
        }
    }
}
