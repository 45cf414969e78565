use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{nearest_centroid, ScoreVector};
use crate::error::{CegaError, Result};

/// Which model output serves as the node embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    /// Post-ReLU hidden layer.
    #[default]
    Hidden,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiversityConfig {
    /// Weight of the distance term against the cluster-size term.
    pub rho: f64,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
    pub kmeans_seed: u64,
    pub embedding: EmbeddingSource,
}

impl Default for DiversityConfig {
    fn default() -> Self {
        DiversityConfig {
            rho: 0.8,
            kmeans_max_iter: 100,
            kmeans_tol: 1e-4,
            kmeans_seed: 0,
            embedding: EmbeddingSource::Hidden,
        }
    }
}

impl DiversityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(CegaError::Config(format!("rho {} must lie in [0, 1]", self.rho)));
        }
        if !(self.kmeans_tol > 0.0) {
            return Err(CegaError::Config("kmeans_tol must be positive".into()));
        }
        Ok(())
    }
}

/// `(x - min) / (max - min)`; a constant input maps to all zeros.
pub fn minmax_scale(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if !(span > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - min) / span).collect()
}

/// Diversity of each candidate relative to the clusters of queried nodes.
///
/// `ρ·φ(1/(1+δ)) + (1−ρ)·φ(1/(1+|Q|))` where `δ` is the distance to the
/// nearest centroid, `|Q|` is the number of queried nodes in that cluster
/// and `φ` is min-max scaling over the candidates.
pub fn diversity_scores(
    candidate_embeddings: &Array2<f64>,
    candidate_ids: &[usize],
    centroids: &Array2<f64>,
    queried_assignments: &[usize],
    rho: f64,
) -> Result<ScoreVector> {
    if candidate_ids.is_empty() {
        return Err(CegaError::Usage("diversity over an empty candidate set".into()));
    }
    if candidate_embeddings.nrows() != candidate_ids.len() {
        return Err(CegaError::Structural(format!(
            "{} embeddings for {} candidates",
            candidate_embeddings.nrows(),
            candidate_ids.len()
        )));
    }
    if centroids.nrows() == 0 || centroids.ncols() != candidate_embeddings.ncols() {
        return Err(CegaError::Structural("centroids do not match the embedding width".into()));
    }
    let mut sizes = vec![0usize; centroids.nrows()];
    for &a in queried_assignments {
        *sizes
            .get_mut(a)
            .ok_or_else(|| CegaError::Structural(format!("assignment {a} has no centroid")))? += 1;
    }
    let (closeness, sparsity): (Vec<f64>, Vec<f64>) = candidate_embeddings
        .rows()
        .into_iter()
        .map(|e| {
            let (c, delta) = nearest_centroid(e, centroids);
            (1.0 / (1.0 + delta), 1.0 / (1.0 + sizes[c] as f64))
        })
        .unzip();
    let closeness = minmax_scale(&closeness);
    let sparsity = minmax_scale(&sparsity);
    let values = closeness
        .iter()
        .zip(&sparsity)
        .map(|(a, b)| rho * a + (1.0 - rho) * b)
        .collect();
    ScoreVector::new(candidate_ids.to_vec(), values)
}
