use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_data, check_dim, LearnerError, TreeModel, TreeParams};
use crate::order::Label;
use crate::rng::{derive_seed, seeded, Rng};

fn bootstrap(n: usize, rng: &mut Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bagged trees voting on a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Committee {
    members: Vec<TreeModel>,
}

impl Committee {
    /// `size` trees, member `k` trained on a bootstrap drawn from
    /// `derive_seed(seed, k)`.
    pub fn fit(x: &[&[f64]], y: &[Label], size: usize, params: &TreeParams, seed: u64) -> Result<Self, LearnerError> {
        check_data(x, y)?;
        if size == 0 {
            return Err(LearnerError::InvalidParam("committee needs at least one member".into()));
        }
        let members = (0..size)
            .map(|k| {
                let mut rng = seeded(derive_seed(seed, k as u64));
                let mut sample = bootstrap(x.len(), &mut rng);
                TreeModel::fit_sample(x, y, &mut sample, params, None, None)
            })
            .collect::<Result<_, _>>()?;
        Ok(Committee { members })
    }

    /// Committee of already trained trees, which must share a dimension.
    pub fn from_members(members: Vec<TreeModel>) -> Result<Self, LearnerError> {
        let first = members
            .first()
            .ok_or_else(|| LearnerError::InvalidParam("committee needs at least one member".into()))?;
        if let Some(t) = members.iter().find(|t| t.dim() != first.dim()) {
            return Err(LearnerError::DimMismatch {
                expected: first.dim(),
                got: t.dim(),
            });
        }
        Ok(Committee { members })
    }

    pub fn members(&self) -> &[TreeModel] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn votes(&self, x: &[f64]) -> Result<Vec<Label>, LearnerError> {
        check_dim(self.members[0].dim(), x)?;
        Ok(self.members.iter().map(|t| t.vote(x)).collect())
    }

    /// Number of members voting `+1`; `x` must have the right dimension.
    pub fn positive_votes(&self, x: &[f64]) -> usize {
        self.members.iter().filter(|t| t.vote(x).is_positive()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Features searched per node; `None` means `ceil(sqrt(d))`.
    #[serde(default)]
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 200,
            tree: TreeParams::default(),
            max_features: None,
        }
    }
}

/// Random forest: bootstrap samples plus per-node feature subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
}

impl ForestModel {
    pub fn fit(x: &[&[f64]], y: &[Label], params: &ForestParams, seed: u64) -> Result<Self, LearnerError> {
        let dim = check_data(x, y)?;
        if params.n_trees == 0 {
            return Err(LearnerError::InvalidParam("forest needs at least one tree".into()));
        }
        let k = params.max_features.unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize);
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seeded(derive_seed(seed, t as u64));
                let mut sample = bootstrap(x.len(), &mut rng);
                TreeModel::fit_sample(x, y, &mut sample, &params.tree, Some(k), Some(&mut rng))
            })
            .collect::<Result<_, _>>()?;
        Ok(ForestModel { trees })
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    /// Fraction of trees voting `+1`.
    pub fn score(&self, x: &[f64]) -> Result<f64, LearnerError> {
        check_dim(self.trees[0].dim(), x)?;
        let pos = self.trees.iter().filter(|t| t.vote(x).is_positive()).count();
        Ok(pos as f64 / self.trees.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::auc;
    use rand_distr::{Distribution, Normal};

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = seeded(seed);
        let normal = Normal::new(0.0, 0.5).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let positive = i % 2 == 0;
            let centre = if positive { 2.0 } else { -2.0 };
            x.push(vec![centre + normal.sample(&mut rng), normal.sample(&mut rng)]);
            y.push(Label::from_membership(positive));
        }
        (x, y)
    }

    fn rows(data: &[Vec<f64>]) -> Vec<&[f64]> {
        data.iter().map(|r| &r[..]).collect()
    }

    #[test]
    fn committee_of_one_and_reproducible_votes() {
        let (x, y) = blobs(40, 1);
        let c = Committee::fit(&rows(&x), &y, 1, &TreeParams::default(), 3).unwrap();
        assert_eq!(c.len(), 1);
        let a = Committee::fit(&rows(&x), &y, 3, &TreeParams::default(), 7).unwrap();
        let b = Committee::fit(&rows(&x), &y, 3, &TreeParams::default(), 7).unwrap();
        for r in &x {
            assert_eq!(a.votes(r).unwrap(), b.votes(r).unwrap());
            assert_eq!(a.votes(r).unwrap().len(), 3);
        }
    }

    #[test]
    fn committee_members_fit_separable_data() {
        let (x, y) = blobs(60, 2);
        let c = Committee::fit(&rows(&x), &y, 3, &TreeParams::default(), 11).unwrap();
        for m in c.members() {
            let correct = x.iter().zip(&y).filter(|(r, &l)| m.vote(r) == l).count();
            assert!(correct as f64 >= 0.9 * x.len() as f64);
        }
    }

    #[test]
    fn unanimous_data_gives_unanimous_votes() {
        let x = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![1.0, 1.0]];
        let c = Committee::fit(&rows(&x), &[Label::Positive; 3], 3, &TreeParams::default(), 0).unwrap();
        assert_eq!(c.votes(&[5.0, 5.0]).unwrap(), vec![Label::Positive; 3]);
        assert_eq!(c.positive_votes(&[5.0, 5.0]), 3);
        assert!(c.votes(&[5.0]).is_err());
    }

    #[test]
    fn single_tree_scores_are_binary() {
        let (x, y) = blobs(30, 4);
        let params = ForestParams {
            n_trees: 1,
            tree: TreeParams {
                max_depth: 30,
                min_leaf: 1,
            },
            max_features: None,
        };
        let f = ForestModel::fit(&rows(&x), &y, &params, 5).unwrap();
        for r in &x {
            let s = f.score(r).unwrap();
            assert!(s == 0.0 || s == 1.0);
        }
    }

    #[test]
    fn all_positive_forest_scores_one() {
        let (x, _) = blobs(20, 6);
        let f = ForestModel::fit(&rows(&x), &[Label::Positive; 20], &ForestParams::default(), 1).unwrap();
        assert_eq!(f.score(&[100.0, -100.0]).unwrap(), 1.0);
        assert_eq!(f.trees().len(), 200);
    }

    #[test]
    fn forest_ranks_separable_training_data() {
        let (x, y) = blobs(80, 8);
        let params = ForestParams {
            n_trees: 50,
            ..ForestParams::default()
        };
        let f = ForestModel::fit(&rows(&x), &y, &params, 9).unwrap();
        let scores: Vec<f64> = x.iter().map(|r| f.score(r).unwrap()).collect();
        assert!(auc(&scores, &y).unwrap() >= 0.99);
        let again = ForestModel::fit(&rows(&x), &y, &params, 9).unwrap();
        assert_eq!(f, again);
    }
}
