//! Time-sensitive combination of entropy, density and centrality
//! percentiles, used as a baseline selector.
//!
//! The density term is a simplified form: `1 / (1 + distance to the nearest
//! k-means centre)` with `K = C` centres fitted on all candidate embeddings.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CegaError, Result};
use crate::rng;
use crate::scoring::{kmeans_fit, nearest_centroid, DiversityConfig, ScoreVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgeConfig {
    /// Epochs used to fit the initial model before selection starts.
    pub warmup_epochs: usize,
}

impl Default for AgeConfig {
    fn default() -> Self {
        AgeConfig { warmup_epochs: 400 }
    }
}

/// `n_t = 1.05 − 0.95^t`.
pub fn age_gamma_shape(t: usize) -> f64 {
    1.05 - 0.95f64.powi(t as i32)
}

/// Inverse-CDF draw from `Beta(1, n)` given `u ∈ [0, 1)`.
pub fn sample_beta_one(n: f64, u: f64) -> f64 {
    1.0 - u.powf(1.0 / n)
}

/// Empirical percentile of each value: the share of the other values that
/// are strictly smaller, in `[0, 1]`.
pub fn percentiles(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    if m <= 1 {
        return vec![0.0; m];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    values
        .iter()
        .map(|v| sorted.partition_point(|s| s < v) as f64 / (m - 1) as f64)
        .collect()
}

/// Density of each candidate embedding around `k` centres fitted on all of them.
pub fn age_density(embeddings: &Array2<f64>, ids: &[usize], k: usize, cfg: &DiversityConfig) -> Result<ScoreVector> {
    let fit = kmeans_fit(embeddings, k, cfg)?;
    let values = embeddings
        .rows()
        .into_iter()
        .map(|e| 1.0 / (1.0 + nearest_centroid(e, &fit.centroids).1))
        .collect();
    ScoreVector::new(ids.to_vec(), values)
}

/// Top-`k` by `α·φ(entropy) + β·φ(density) + γ·φ(centrality)` with
/// `α = β = (1 − γ)/2` and a given `γ`.
pub fn age_select_with_gamma(
    entropy: &ScoreVector,
    density: &ScoreVector,
    centrality: &ScoreVector,
    gamma: f64,
    k: usize,
) -> Result<Vec<usize>> {
    let ids = entropy.node_ids();
    if density.node_ids() != ids || centrality.node_ids() != ids {
        return Err(CegaError::Usage("AGE score vectors cover different candidates".into()));
    }
    if k > ids.len() {
        return Err(CegaError::Usage(format!("cannot select {k} of {} candidates", ids.len())));
    }
    let alpha = (1.0 - gamma) / 2.0;
    let beta = alpha;
    let pe = percentiles(entropy.values());
    let pd = percentiles(density.values());
    let pc = percentiles(centrality.values());
    let combined: Vec<f64> = (0..ids.len())
        .map(|i| alpha * pe[i] + beta * pd[i] + gamma * pc[i])
        .collect();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| combined[b].total_cmp(&combined[a]).then(ids[a].cmp(&ids[b])));
    Ok(order.into_iter().take(k).map(|i| ids[i]).collect())
}

/// AGE selection at iteration `t ≥ 1`, with `γ_t ~ Beta(1, n_t)` drawn from `seed`.
pub fn age_select(
    entropy: &ScoreVector,
    density: &ScoreVector,
    centrality: &ScoreVector,
    t: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if t == 0 {
        return Err(CegaError::Usage("AGE iteration index starts at 1".into()));
    }
    let u: f64 = rng::rng_from(seed).random();
    let gamma = sample_beta_one(age_gamma_shape(t), u);
    age_select_with_gamma(entropy, density, centrality, gamma, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> ScoreVector {
        ScoreVector::new((0..v.len()).collect(), v.to_vec()).unwrap()
    }

    #[test]
    fn shape_at_first_iteration() {
        assert!((age_gamma_shape(1) - 0.10).abs() < 1e-12);
        assert!(age_gamma_shape(50) > age_gamma_shape(5));
    }

    #[test]
    fn gamma_one_follows_centrality() {
        let e = sv(&[0.9, 0.1, 0.5, 0.3]);
        let d = sv(&[0.1, 0.9, 0.2, 0.8]);
        let c = sv(&[0.2, 0.4, 0.1, 0.9]);
        assert_eq!(age_select_with_gamma(&e, &d, &c, 1.0, 2).unwrap(), vec![3, 1]);
    }

    #[test]
    fn parameterization_sums_to_one() {
        let mut r = rng::rng_from(1);
        for t in 1..200 {
            let g = sample_beta_one(age_gamma_shape(t), r.random());
            assert!((0.0..=1.0).contains(&g));
            let a = (1.0 - g) / 2.0;
            assert!((a + a + g - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn beta_inverse_cdf_mean() {
        // Beta(1, n) has mean 1 / (1 + n).
        let n = 0.7;
        let mut r = rng::rng_from(3);
        let draws = 200_000;
        let mean: f64 = (0..draws).map(|_| sample_beta_one(n, r.random())).sum::<f64>() / draws as f64;
        assert!((mean - 1.0 / 1.7).abs() < 5e-3, "{mean}");
    }

    #[test]
    fn percentile_ties_and_range() {
        assert_eq!(percentiles(&[3.0, 1.0, 3.0, 2.0]), vec![2.0 / 3.0, 0.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(percentiles(&[5.0]), vec![0.0]);
    }

    #[test]
    fn mismatched_candidates() {
        let a = sv(&[1.0, 2.0]);
        let b = ScoreVector::new(vec![0, 5], vec![1.0, 2.0]).unwrap();
        assert!(matches!(age_select(&a, &b, &a, 1, 1, 0), Err(CegaError::Usage(_))));
    }

    #[test]
    fn deterministic_under_seed() {
        let e = sv(&[0.9, 0.1, 0.5, 0.3, 0.7]);
        let d = sv(&[0.1, 0.9, 0.2, 0.8, 0.4]);
        let c = sv(&[0.2, 0.4, 0.1, 0.9, 0.6]);
        assert_eq!(age_select(&e, &d, &c, 3, 2, 8).unwrap(), age_select(&e, &d, &c, 3, 2, 8).unwrap());
    }
}
