//! Layered random DAGs with noisy pair features.
//!
//! Nodes are spread evenly over `n_layers` layers and every pair from a lower
//! to a higher layer becomes an edge with probability `edge_prob`, which
//! guarantees acyclicity. Each node gets a latent embedding that mixes its
//! own Gaussian vector with the embeddings of its ancestors, so that
//! comparable pairs have correlated embeddings. A pair's feature vector is
//! `[emb(a), emb(b), emb(a) - emb(b), layer_gap]` plus Gaussian noise.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::order::{GroundTruth, Pair};
use crate::rng::{derive_seed, seeded};

use super::{DatasetError, Pool};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_nodes: usize,
    pub n_layers: usize,
    pub edge_prob: f64,
    /// Latent embedding size; pair features have `3 * dim + 1` components.
    pub dim: usize,
    pub noise: f64,
    pub seed: u64,
    /// Uniformly subsample the pool down to at most this many pairs.
    #[serde(default)]
    pub max_pairs: Option<usize>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_nodes: 60,
            n_layers: 5,
            edge_prob: 0.15,
            dim: 4,
            noise: 0.5,
            seed: 0,
            max_pairs: None,
        }
    }
}

/// Weight of the inherited ancestor signal in a node's embedding.
const INHERIT: f64 = 0.8;

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Pool, DatasetError> {
    if cfg.n_layers < 2 {
        return Err(DatasetError::Invalid("n_layers must be at least 2".into()));
    }
    if cfg.n_nodes < cfg.n_layers {
        return Err(DatasetError::Invalid("need at least one node per layer".into()));
    }
    if !(cfg.edge_prob > 0.0 && cfg.edge_prob <= 1.0) {
        return Err(DatasetError::Invalid("edge_prob must be in (0, 1]".into()));
    }
    if cfg.dim < 2 {
        return Err(DatasetError::Invalid("dim must be at least 2".into()));
    }
    if !(cfg.noise >= 0.0 && cfg.noise.is_finite()) {
        return Err(DatasetError::Invalid("noise must be a finite non-negative std-dev".into()));
    }

    let n = cfg.n_nodes;
    let layer = |i: usize| i * cfg.n_layers / n;

    let mut rng = seeded(derive_seed(cfg.seed, 0));
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if layer(a) < layer(b) && rng.random::<f64>() < cfg.edge_prob {
                edges.push(Pair::new(a, b));
            }
        }
    }
    if edges.is_empty() {
        return Err(DatasetError::Degenerate);
    }
    let truth = GroundTruth::from_edges(n, edges).expect("layered edges are acyclic");

    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let mut emb_rng = seeded(derive_seed(cfg.seed, 1));
    let own: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..cfg.dim).map(|_| std_normal.sample(&mut emb_rng)).collect())
        .collect();
    // Nodes are numbered in layer order, so ancestors always precede.
    let mut emb: Vec<Vec<f64>> = Vec::with_capacity(n);
    for v in 0..n {
        let ancestors: Vec<usize> = (0..v).filter(|&u| truth.matrix().contains(u, v)).collect();
        let mut e = own[v].clone();
        if !ancestors.is_empty() {
            for (k, slot) in e.iter_mut().enumerate() {
                let inherited = ancestors.iter().map(|&u| own[u][k]).sum::<f64>() / (ancestors.len() as f64).sqrt();
                *slot = (1.0 - INHERIT) * *slot + INHERIT * inherited;
            }
        }
        emb.push(e);
    }

    let active = truth.active_nodes();
    let mut pairs: Vec<Pair> = active
        .iter()
        .flat_map(|&a| active.iter().map(move |&b| Pair { src: a, dst: b }))
        .filter(|p| !p.is_reflexive())
        .collect();
    if let Some(cap) = cfg.max_pairs {
        if cap < pairs.len() {
            let mut sub_rng = seeded(derive_seed(cfg.seed, 2));
            let mut keep = index::sample(&mut sub_rng, pairs.len(), cap).into_vec();
            keep.sort_unstable();
            pairs = keep.into_iter().map(|i| pairs[i]).collect();
        }
    }

    let noise = Normal::new(0.0, cfg.noise.max(f64::MIN_POSITIVE)).expect("valid normal");
    let mut noise_rng = seeded(derive_seed(cfg.seed, 3));
    let span = (cfg.n_layers - 1) as f64;
    let features = pairs
        .iter()
        .map(|p| {
            let (a, b) = (p.src.index(), p.dst.index());
            let mut f = Vec::with_capacity(3 * cfg.dim + 1);
            f.extend_from_slice(&emb[a]);
            f.extend_from_slice(&emb[b]);
            f.extend(emb[a].iter().zip(&emb[b]).map(|(x, y)| x - y));
            f.push((layer(b) as f64 - layer(a) as f64) / span);
            if cfg.noise > 0.0 {
                for v in f.iter_mut() {
                    *v += noise.sample(&mut noise_rng);
                }
            }
            f
        })
        .collect();
    Pool::new(truth, pairs, features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::is_strict_order;

    #[test]
    fn forced_topology() {
        let cfg = SyntheticConfig {
            n_nodes: 2,
            n_layers: 2,
            edge_prob: 1.0,
            dim: 2,
            noise: 0.1,
            seed: 3,
            max_pairs: None,
        };
        let pool = generate_synthetic(&cfg).unwrap();
        assert_eq!(pool.truth().relation().collect::<Vec<_>>(), vec![Pair::new(0u32, 1u32)]);
        assert_eq!(pool.pairs(), &[Pair::new(0u32, 1u32), Pair::new(1u32, 0u32)]);
        assert_eq!(pool.dim(), 7);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = SyntheticConfig {
            seed: 9,
            ..SyntheticConfig::default()
        };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a.pairs(), b.pairs());
        assert_eq!(a.truth(), b.truth());
        for i in 0..a.len() {
            assert_eq!(a.features(i), b.features(i));
        }
    }

    #[test]
    fn positive_rate_is_in_a_sane_band() {
        for seed in 0..20 {
            let cfg = SyntheticConfig {
                seed,
                ..SyntheticConfig::default()
            };
            let pool = generate_synthetic(&cfg).unwrap();
            let rate = pool.positive_rate();
            assert!((0.05..=0.6).contains(&rate), "seed {seed}: rate {rate}");
            let rel: Vec<Pair> = pool.truth().relation().collect();
            assert!(is_strict_order(&rel));
        }
    }

    #[test]
    fn subsampling_caps_the_pool() {
        let cfg = SyntheticConfig {
            max_pairs: Some(500),
            ..SyntheticConfig::default()
        };
        let pool = generate_synthetic(&cfg).unwrap();
        assert_eq!(pool.len(), 500);
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = [
            SyntheticConfig {
                n_layers: 1,
                ..SyntheticConfig::default()
            },
            SyntheticConfig {
                edge_prob: 0.0,
                ..SyntheticConfig::default()
            },
            SyntheticConfig {
                dim: 1,
                ..SyntheticConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(generate_synthetic(&cfg), Err(DatasetError::Invalid(_))));
        }
    }

    #[test]
    fn zero_edges_is_degenerate() {
        // Tiny edge probability on two nodes: search for a seed with no edge.
        let seed = (0..1000u64)
            .find(|&s| {
                let mut rng = seeded(derive_seed(s, 0));
                rng.random::<f64>() >= 1e-3
            })
            .unwrap();
        let cfg = SyntheticConfig {
            n_nodes: 2,
            n_layers: 2,
            edge_prob: 1e-3,
            dim: 2,
            noise: 0.0,
            seed,
            max_pairs: None,
        };
        assert!(matches!(generate_synthetic(&cfg), Err(DatasetError::Degenerate)));
    }
}
