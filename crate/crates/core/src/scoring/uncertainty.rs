use ndarray::{Array2, ArrayView1};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ScoreVector;
use crate::error::{CegaError, Result};
use crate::gcn::{argmax, forward_dense, GcnParams};
use crate::graph::{FeatureMatrix, SparseOperator};
use crate::rng;

/// Shannon entropy (natural log) of a probability row, with `0 ln 0 = 0`.
pub fn entropy(row: ArrayView1<f64>) -> f64 {
    -row.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn entropy_scores(softmax: &Array2<f64>, candidates: &[usize]) -> Result<ScoreVector> {
    if let Some(&bad) = candidates.iter().find(|&&v| v >= softmax.nrows()) {
        return Err(CegaError::Usage(format!("candidate {bad} has no softmax row")));
    }
    let values = candidates.iter().map(|&v| entropy(softmax.row(v))).collect();
    ScoreVector::new(candidates.to_vec(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    /// Standard deviation of the feature noise.
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            epsilon: 0.1,
            trials: 20,
            seed: 0,
        }
    }
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CegaError::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.trials == 0 {
            return Err(CegaError::Config("perturbation trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Count, per candidate, how many noisy forward passes keep its predicted
/// label.
///
/// Each trial adds i.i.d. `N(0, ε²)` noise to every feature of every node and
/// runs the model once; trial `ℓ` draws from its own substream of `cfg.seed`.
pub fn perturbation_scores(
    params: &GcnParams,
    norm_adj: &SparseOperator,
    x: &FeatureMatrix,
    candidates: &[usize],
    cfg: &PerturbationConfig,
) -> Result<ScoreVector> {
    cfg.validate()?;
    let noise = Normal::new(0.0, cfg.epsilon).expect("validated epsilon");
    perturbation_scores_with(params, norm_adj, x, candidates, cfg.trials, |trial, feats| {
        let mut r = rng::rng_from(rng::derive_indexed(cfg.seed, "perturb", trial as u64));
        feats.mapv_inplace(|v| v + noise.sample(&mut r));
    })
}

/// [`perturbation_scores`] with a caller-supplied perturbation of the
/// feature matrix for each trial.
pub fn perturbation_scores_with<F>(
    params: &GcnParams,
    norm_adj: &SparseOperator,
    x: &FeatureMatrix,
    candidates: &[usize],
    trials: usize,
    mut perturb: F,
) -> Result<ScoreVector>
where
    F: FnMut(usize, &mut Array2<f64>),
{
    if let Some(&bad) = candidates.iter().find(|&&v| v >= x.num_nodes()) {
        return Err(CegaError::Usage(format!("candidate {bad} outside the graph")));
    }
    let base = forward_dense(params, norm_adj, x.values())?;
    let base_labels: Vec<usize> = candidates.iter().map(|&v| argmax(base.softmax.row(v))).collect();
    let mut counts = vec![0.0; candidates.len()];
    for trial in 0..trials {
        let mut noisy = x.values().clone();
        perturb(trial, &mut noisy);
        let out = forward_dense(params, norm_adj, &noisy)?;
        for ((count, &v), &label) in counts.iter_mut().zip(candidates).zip(&base_labels) {
            if argmax(out.softmax.row(v)) == label {
                *count += 1.0;
            }
        }
    }
    ScoreVector::new(candidates.to_vec(), counts)
}
