use ndarray::Dimension;
use serde::{Deserialize, Serialize};

use super::{init_params, loss_and_gradients, GcnParams};
use crate::error::{CegaError, Result};
use crate::graph::{FeatureMatrix, LabelVector, SparseOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 1000,
            hidden_dim: super::DEFAULT_HIDDEN,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CegaError::Config(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(CegaError::Config("epochs must be at least 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(CegaError::Config("hidden_dim must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(CegaError::Config("adam betas must lie in [0, 1)".into()));
        }
        if !(self.adam_eps > 0.0) {
            return Err(CegaError::Config("adam_eps must be positive".into()));
        }
        Ok(())
    }
}

/// Labelled nodes used as the training mask.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainingSet {
    nodes: Vec<usize>,
    labels: Vec<usize>,
}

impl TrainingSet {
    pub fn new(nodes: Vec<usize>, labels: Vec<usize>) -> Result<Self> {
        if nodes.len() != labels.len() {
            return Err(CegaError::Usage(format!(
                "{} nodes but {} labels",
                nodes.len(),
                labels.len()
            )));
        }
        let mut seen = nodes.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(CegaError::Usage("training mask lists a node twice".into()));
        }
        Ok(TrainingSet { nodes, labels })
    }

    /// Ground-truth labels restricted to `mask`.
    pub fn from_mask(labels: &LabelVector, mask: &[usize]) -> Result<Self> {
        if let Some(&bad) = mask.iter().find(|&&u| u >= labels.num_nodes()) {
            return Err(CegaError::Usage(format!("mask node {bad} has no label")));
        }
        TrainingSet::new(mask.to_vec(), mask.iter().map(|&u| labels.get(u)).collect())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().copied().zip(self.labels.iter().copied())
    }
}

struct Moments<D: Dimension> {
    m: ndarray::Array<f64, D>,
    v: ndarray::Array<f64, D>,
}

impl<D: Dimension> Moments<D> {
    fn like(p: &ndarray::Array<f64, D>) -> Self {
        Moments {
            m: ndarray::Array::zeros(p.raw_dim()),
            v: ndarray::Array::zeros(p.raw_dim()),
        }
    }

    fn step(&mut self, p: &mut ndarray::Array<f64, D>, g: &ndarray::Array<f64, D>, cfg: &TrainConfig, t: i32) {
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        ndarray::Zip::from(p)
            .and(&mut self.m)
            .and(&mut self.v)
            .and(g)
            .for_each(|p, m, v, &g| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.adam_eps);
            });
    }
}

/// Full-batch Adam on masked cross-entropy.
///
/// With `warm_start` the weights continue from the given model and the
/// optimizer state starts fresh; otherwise weights are initialized from
/// `cfg.seed`.
pub fn train(
    norm_adj: &SparseOperator,
    x: &FeatureMatrix,
    set: &TrainingSet,
    num_classes: usize,
    cfg: &TrainConfig,
    warm_start: Option<&GcnParams>,
) -> Result<GcnParams> {
    train_traced(norm_adj, x, set, num_classes, cfg, warm_start).map(|(p, _)| p)
}

/// Like [`train`], also returning the loss recorded before each update.
pub fn train_traced(
    norm_adj: &SparseOperator,
    x: &FeatureMatrix,
    set: &TrainingSet,
    num_classes: usize,
    cfg: &TrainConfig,
    warm_start: Option<&GcnParams>,
) -> Result<(GcnParams, Vec<f64>)> {
    cfg.validate()?;
    if set.is_empty() {
        return Err(CegaError::Usage("training mask is empty".into()));
    }
    if let Some(&bad) = set.nodes().iter().find(|&&u| u >= x.num_nodes()) {
        return Err(CegaError::Usage(format!("mask node {bad} outside the graph")));
    }
    if let Some((_, bad)) = set.iter().find(|&(_, l)| l >= num_classes) {
        return Err(CegaError::Usage(format!("label {bad} not below {num_classes} classes")));
    }
    let mut params = match warm_start {
        Some(p) => {
            if p.num_classes() != num_classes {
                return Err(CegaError::Structural("warm start has a different class count".into()));
            }
            p.clone()
        }
        None => init_params(x.dim(), cfg.hidden_dim, num_classes, cfg.seed),
    };
    let mut m_w1 = Moments::like(&params.w1);
    let mut m_w2 = Moments::like(&params.w2);
    let mut m_b2: Moments<ndarray::Ix1> = Moments::like(&params.b2);
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let (loss, g) = loss_and_gradients(&params, norm_adj, x.values(), set)?;
        if !loss.is_finite() {
            return Err(CegaError::TrainingDivergence { epoch, loss });
        }
        losses.push(loss);
        let t = epoch.min(i32::MAX as usize) as i32;
        m_w1.step(&mut params.w1, &g.w1, cfg, t);
        m_w2.step(&mut params.w2, &g.w2, cfg, t);
        m_b2.step(&mut params.b2, &g.b2, cfg, t);
    }
    Ok((params, losses))
}
