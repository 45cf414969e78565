use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{CegaError, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    /// Fraction of all nodes placed in the candidate pool.
    pub pool_fraction: f64,
    /// Fraction of the non-pool nodes used to train the target.
    pub train_fraction: f64,
    /// Draw the pool independently of the train/test split.
    pub allow_overlap: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            pool_fraction: 0.1,
            train_fraction: 0.6,
            allow_overlap: false,
        }
    }
}

/// Node sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePartition {
    pub target_train: Vec<usize>,
    pub test: Vec<usize>,
    pub candidate_pool: Vec<usize>,
}

// `floor` with a little slack so that e.g. 0.6 * 90 lands on 54.
fn floor_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Random split into candidate pool, target-train and test sets.
///
/// The pool gets `floor(pool_fraction * N)` nodes, target-train gets
/// `floor(train_fraction * rest)` and the test set the remainder.
pub fn split_partition(num_nodes: usize, cfg: &PartitionConfig, seed: u64) -> Result<NodePartition> {
    for (name, f) in [("pool_fraction", cfg.pool_fraction), ("train_fraction", cfg.train_fraction)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(CegaError::Config(format!("{name} = {f} must lie in (0, 1)")));
        }
    }
    let pool_n = floor_count(cfg.pool_fraction, num_nodes);
    let mut r = rng::substream(seed, "partition");
    let mut order: Vec<usize> = (0..num_nodes).collect();
    order.shuffle(&mut r);

    let (mut pool, mut train, mut test);
    if cfg.allow_overlap {
        pool = order[..pool_n].to_vec();
        let mut order2: Vec<usize> = (0..num_nodes).collect();
        order2.shuffle(&mut r);
        let train_n = floor_count(cfg.train_fraction, num_nodes);
        train = order2[..train_n].to_vec();
        test = order2[train_n..].to_vec();
    } else {
        let rest = &order[pool_n..];
        let train_n = floor_count(cfg.train_fraction, rest.len());
        pool = order[..pool_n].to_vec();
        train = rest[..train_n].to_vec();
        test = rest[train_n..].to_vec();
    }
    for (name, set) in [("candidate pool", &pool), ("target-train set", &train), ("test set", &test)] {
        if set.is_empty() {
            return Err(CegaError::Config(format!("partition produces an empty {name}")));
        }
    }
    pool.sort_unstable();
    train.sort_unstable();
    test.sort_unstable();
    Ok(NodePartition {
        target_train: train,
        test,
        candidate_pool: pool,
    })
}
