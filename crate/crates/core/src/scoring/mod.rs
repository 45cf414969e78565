//! Node scoring criteria: structural representativeness, predictive
//! uncertainty, and embedding-space diversity.

mod diversity;
mod kmeans;
mod pagerank;
mod uncertainty;

pub use diversity::{diversity_scores, minmax_scale, DiversityConfig, EmbeddingSource};
pub use kmeans::{kmeans_fit, nearest_centroid, KMeansFit};
pub use pagerank::{pagerank, PageRankConfig};
pub use uncertainty::{entropy, entropy_scores, perturbation_scores, perturbation_scores_with, PerturbationConfig};

use std::fmt::Write as _;

use crate::error::{CegaError, Result};

/// Scores for a set of candidate nodes, parallel arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    node_ids: Vec<usize>,
    values: Vec<f64>,
}

impl ScoreVector {
    pub fn new(node_ids: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if node_ids.len() != values.len() {
            return Err(CegaError::Usage(format!(
                "{} node ids but {} scores",
                node_ids.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CegaError::Structural(format!("non-finite score {v}")));
        }
        let mut sorted = node_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CegaError::Usage("duplicate node id in score vector".into()));
        }
        Ok(ScoreVector { node_ids, values })
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restrict to `ids` (in that order). Every id must be present.
    pub fn subset(&self, ids: &[usize]) -> Result<ScoreVector> {
        let index: std::collections::HashMap<usize, f64> =
            self.node_ids.iter().copied().zip(self.values.iter().copied()).collect();
        let values = ids
            .iter()
            .map(|id| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| CegaError::Usage(format!("node {id} has no score")))
            })
            .collect::<Result<Vec<_>>>()?;
        ScoreVector::new(ids.to_vec(), values)
    }

    /// `node_id,score` lines with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node_id,score\n");
        for (id, v) in self.node_ids.iter().zip(&self.values) {
            writeln!(out, "{id},{}", crate::graph::io::fmt_real(*v)).unwrap();
        }
        out
    }
}
