use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, LabelVector, SparseGraph};
use crate::error::{CegaError, Result};
use crate::rng;

/// Planted-partition graph with Gaussian class-conditional features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmConfig {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub intra_p: f64,
    pub inter_p: f64,
    pub feature_dim: usize,
    /// Distance of each class mean from the origin along its own axis.
    pub feature_separation: f64,
    pub noise_sigma: f64,
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(CegaError::Config(format!("sbm: {m}")));
        if self.num_nodes == 0 {
            return fail("num_nodes must be positive");
        }
        if self.num_classes == 0 || self.num_classes > self.num_nodes {
            return fail("num_classes must be in 1..=num_nodes");
        }
        if !(0.0 <= self.inter_p && self.inter_p < self.intra_p && self.intra_p <= 1.0) {
            return fail("need 0 <= inter_p < intra_p <= 1");
        }
        if self.feature_dim == 0 {
            return fail("feature_dim must be positive");
        }
        if !(self.feature_separation >= 0.0 && self.feature_separation.is_finite()) {
            return fail("feature_separation must be a non-negative number");
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return fail("noise_sigma must be positive");
        }
        Ok(())
    }

    /// Contiguous blocks; the first `n % C` blocks get one extra node.
    pub fn block_of(&self) -> Vec<usize> {
        let base = self.num_nodes / self.num_classes;
        let extra = self.num_nodes % self.num_classes;
        (0..self.num_classes)
            .flat_map(|c| std::iter::repeat_n(c, base + usize::from(c < extra)))
            .collect()
    }
}

pub fn generate_sbm(cfg: &SbmConfig, seed: u64) -> Result<(SparseGraph, FeatureMatrix, LabelVector)> {
    cfg.validate()?;
    let n = cfg.num_nodes;
    let blocks = cfg.block_of();

    let mut edge_rng = rng::substream(seed, "sbm-edges");
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if blocks[u] == blocks[v] { cfg.intra_p } else { cfg.inter_p };
            if edge_rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = SparseGraph::from_edges(&edges, n, true)?;

    let mut feat_rng = rng::substream(seed, "sbm-features");
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
    let mut x = Array2::<f64>::zeros((n, cfg.feature_dim));
    for (u, mut row) in x.rows_mut().into_iter().enumerate() {
        for v in row.iter_mut() {
            *v = noise.sample(&mut feat_rng);
        }
        row[blocks[u] % cfg.feature_dim] += cfg.feature_separation;
    }

    Ok((
        graph,
        FeatureMatrix::new(x)?,
        LabelVector::new(blocks, cfg.num_classes)?,
    ))
}
