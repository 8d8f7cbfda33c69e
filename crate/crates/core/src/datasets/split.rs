use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::order::Pair;
use crate::rng::seeded;

use super::{DatasetError, Pool};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub n_seeds: usize,
    /// Draw half the seeds from each class instead of uniformly.
    #[serde(default)]
    pub balanced_seeds: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 2.0 / 3.0,
            n_seeds: 20,
            balanced_seeds: false,
        }
    }
}

/// Train/test partition of a pool plus the initial labeled seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
    pub seed_pairs: Vec<Pair>,
}

pub fn split(pool: &Pool, cfg: &SplitConfig, rng_seed: u64) -> Result<Split, DatasetError> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(DatasetError::Invalid("train_fraction must be in (0, 1)".into()));
    }
    let mut rng = seeded(rng_seed);
    let mut pairs = pool.pairs().to_vec();
    pairs.shuffle(&mut rng);
    let n_train = (pairs.len() as f64 * cfg.train_fraction).round() as usize;
    let test = pairs.split_off(n_train);
    let train = pairs;
    if cfg.n_seeds > train.len() {
        return Err(DatasetError::TooSmall {
            needed: cfg.n_seeds,
            available: train.len(),
        });
    }
    let seed_pairs = if cfg.balanced_seeds {
        let is_pos = |p: &Pair| pool.truth().contains(*p);
        let mut pos: Vec<Pair> = train.iter().copied().filter(is_pos).collect();
        let mut neg: Vec<Pair> = train.iter().copied().filter(|p| !is_pos(p)).collect();
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let want_pos = (cfg.n_seeds / 2).min(pos.len());
        let want_neg = (cfg.n_seeds - want_pos).min(neg.len());
        let want_pos = cfg.n_seeds - want_neg;
        pos.truncate(want_pos);
        neg.truncate(want_neg);
        pos.extend(neg);
        pos
    } else {
        let mut candidates = train.clone();
        candidates.shuffle(&mut rng);
        candidates.truncate(cfg.n_seeds);
        candidates
    };
    Ok(Split {
        train,
        test,
        seed_pairs,
    })
}
