use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{check_data, check_dim, LearnerError};
use crate::order::Label;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: Label,
        positive_fraction: f64,
        samples: usize,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART classification tree with Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    dim: usize,
    nodes: Vec<TreeNode>,
}

struct Builder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [Label],
    params: TreeParams,
    dim: usize,
    max_features: Option<usize>,
    rng: Option<&'a mut Rng>,
    nodes: Vec<TreeNode>,
    buf: Vec<(f64, bool)>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeModel {
    /// Fits on every row, searching all features at each node.
    pub fn fit(x: &[&[f64]], y: &[Label], params: &TreeParams) -> Result<Self, LearnerError> {
        let mut sample: Vec<usize> = (0..x.len()).collect();
        Self::fit_sample(x, y, &mut sample, params, None, None)
    }

    /// Fits on the rows listed in `sample` (repeats allowed). With
    /// `max_features = Some(k)` each node searches `k` features drawn from
    /// `rng`.
    pub fn fit_sample(
        x: &[&[f64]],
        y: &[Label],
        sample: &mut [usize],
        params: &TreeParams,
        max_features: Option<usize>,
        rng: Option<&mut Rng>,
    ) -> Result<Self, LearnerError> {
        let dim = check_data(x, y)?;
        if sample.is_empty() {
            return Err(LearnerError::Empty);
        }
        if params.min_leaf == 0 {
            return Err(LearnerError::InvalidParam("min_leaf must be at least 1".into()));
        }
        if max_features.is_some() && rng.is_none() {
            return Err(LearnerError::InvalidParam("feature subsampling needs an rng".into()));
        }
        let mut b = Builder {
            x,
            y,
            params: *params,
            dim,
            max_features: max_features.map(|k| k.clamp(1, dim)),
            rng,
            nodes: Vec::new(),
            buf: Vec::with_capacity(sample.len()),
        };
        b.build(sample, 0);
        Ok(TreeModel { dim, nodes: b.nodes })
    }

    /// A tree that answers `label` everywhere.
    pub fn constant(dim: usize, label: Label) -> Self {
        TreeModel {
            dim,
            nodes: vec![TreeNode::Leaf {
                label,
                positive_fraction: if label.is_positive() { 1.0 } else { 0.0 },
                samples: 0,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    fn leaf(&self, x: &[f64]) -> (Label, f64) {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf {
                    label,
                    positive_fraction,
                    ..
                } => return (label, positive_fraction),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label, LearnerError> {
        check_dim(self.dim, x)?;
        Ok(self.vote(x))
    }

    /// Leaf label for `x`, which must have the tree's dimension.
    #[inline]
    pub fn vote(&self, x: &[f64]) -> Label {
        self.leaf(x).0
    }

    pub fn positive_fraction(&self, x: &[f64]) -> Result<f64, LearnerError> {
        check_dim(self.dim, x)?;
        Ok(self.leaf(x).1)
    }
}

impl Builder<'_> {
    fn build(&mut self, sample: &mut [usize], depth: usize) -> usize {
        let m = sample.len();
        let pos = sample.iter().filter(|&&i| self.y[i].is_positive()).count();
        let id = self.nodes.len();
        let fraction = pos as f64 / m as f64;
        // Majority label; an even split goes to the negative class.
        self.nodes.push(TreeNode::Leaf {
            label: Label::from_membership(fraction > 0.5),
            positive_fraction: fraction,
            samples: m,
        });
        if pos == 0 || pos == m || depth >= self.params.max_depth || m < 2 * self.params.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(sample, pos) else {
            return id;
        };
        let (f, t) = (best.feature, best.threshold);
        let x = self.x;
        let mut split_at = 0;
        for k in 0..m {
            if x[sample[k]][f] <= t {
                sample.swap(k, split_at);
                split_at += 1;
            }
        }
        let (left_s, right_s) = sample.split_at_mut(split_at);
        let left = self.build(left_s, depth + 1);
        let right = self.build(right_s, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: f,
            threshold: t,
            left,
            right,
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        match (self.max_features, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < self.dim => {
                let mut f = index::sample(rng, self.dim, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.dim).collect(),
        }
    }

    /// Lowest weighted Gini impurity split; ties keep the first candidate in
    /// (feature, threshold) order.
    fn best_split(&mut self, sample: &[usize], pos: usize) -> Option<BestSplit> {
        let m = sample.len();
        let min_leaf = self.params.min_leaf;
        let neg = m - pos;
        // Impurity scaled by m: m - sum_k (count_k^2) / m.
        let parent = m as f64 - ((pos * pos + neg * neg) as f64) / m as f64;
        let mut best: Option<BestSplit> = None;
        for f in self.candidate_features() {
            self.buf.clear();
            self.buf
                .extend(sample.iter().map(|&i| (self.x[i][f], self.y[i].is_positive())));
            self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut lp = 0usize;
            for k in 1..m {
                if self.buf[k - 1].1 {
                    lp += 1;
                }
                let (lo, hi) = (self.buf[k - 1].0, self.buf[k].0);
                if lo == hi || k < min_leaf || m - k < min_leaf {
                    continue;
                }
                let ln = k - lp;
                let (rp, rn) = (pos - lp, neg - ln);
                let score = m as f64
                    - ((lp * lp + ln * ln) as f64) / k as f64
                    - ((rp * rp + rn * rn) as f64) / (m - k) as f64;
                if best.as_ref().is_none_or(|b| score < b.score - 1e-12) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: midpoint(lo, hi),
                        score,
                    });
                }
            }
        }
        best.filter(|b| b.score < parent - 1e-12)
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(data: &[Vec<f64>]) -> Vec<&[f64]> {
        data.iter().map(|r| &r[..]).collect()
    }

    #[test]
    fn single_class_is_a_single_leaf() {
        let data = vec![vec![1.0], vec![2.0], vec![3.0]];
        let t = TreeModel::fit(&rows(&data), &[Label::Negative; 3], &TreeParams::default()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict(&[10.0]).unwrap(), Label::Negative);
    }

    #[test]
    fn threshold_is_the_midpoint() {
        let data = vec![vec![1.0], vec![2.0], vec![4.0], vec![6.0]];
        let y = [Label::Negative, Label::Negative, Label::Positive, Label::Positive];
        let t = TreeModel::fit(&rows(&data), &y, &TreeParams::default()).unwrap();
        assert_eq!(
            t.nodes()[0],
            TreeNode::Split {
                feature: 0,
                threshold: 3.0,
                left: 1,
                right: 2
            }
        );
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(&[2.9]).unwrap(), Label::Negative);
        assert_eq!(t.predict(&[3.1]).unwrap(), Label::Positive);
    }

    #[test]
    fn ties_prefer_the_lowest_feature() {
        // Both features separate perfectly.
        let data = vec![vec![0.0, 10.0], vec![1.0, 20.0]];
        let y = [Label::Negative, Label::Positive];
        let t = TreeModel::fit(&rows(&data), &y, &TreeParams::default()).unwrap();
        assert!(matches!(t.nodes()[0], TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn greedy_search_stops_on_xor() {
        let data = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [Label::Negative, Label::Positive, Label::Positive, Label::Negative];
        let shallow = TreeModel::fit(
            &rows(&data),
            &y,
            &TreeParams {
                max_depth: 1,
                min_leaf: 1,
            },
        )
        .unwrap();
        // No single split lowers the impurity of XOR, at any depth budget.
        assert_eq!(shallow.nodes().len(), 1);
        let t = TreeModel::fit(&rows(&data), &y, &TreeParams::default()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.positive_fraction(&[0.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn depth_limit_and_purity() {
        let data: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<Label> = (0..64).map(|i| Label::from_membership(i % 2 == 0)).collect();
        for max_depth in [1, 3, 8] {
            let t = TreeModel::fit(&rows(&data), &y, &TreeParams { max_depth, min_leaf: 1 }).unwrap();
            assert!(t.depth() <= max_depth);
        }
        let deep = TreeModel::fit(
            &rows(&data),
            &y,
            &TreeParams {
                max_depth: 64,
                min_leaf: 1,
            },
        )
        .unwrap();
        for (r, &l) in data.iter().zip(&y) {
            assert_eq!(deep.predict(r).unwrap(), l);
        }
    }

    #[test]
    fn min_leaf_is_respected() {
        let data: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<Label> = (0..10).map(|i| Label::from_membership(i == 0)).collect();
        let t = TreeModel::fit(
            &rows(&data),
            &y,
            &TreeParams {
                max_depth: 8,
                min_leaf: 3,
            },
        )
        .unwrap();
        for n in t.nodes() {
            if let TreeNode::Leaf { samples, .. } = n {
                assert!(*samples >= 3);
            }
        }
    }

    #[test]
    fn dimension_is_checked() {
        let data = vec![vec![1.0, 2.0]];
        let t = TreeModel::fit(&rows(&data), &[Label::Positive], &TreeParams::default()).unwrap();
        assert!(matches!(t.predict(&[1.0]), Err(LearnerError::DimMismatch { expected: 2, got: 1 })));
    }
}
