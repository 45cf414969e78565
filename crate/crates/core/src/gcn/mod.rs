//! Two-layer graph convolutional classifier.
//!
//! ```text
//! hidden  = ReLU(S · X · W1)
//! logits  = hidden · W2 + b2
//! softmax = row-wise softmax(logits)
//! ```
//!
//! `S` is the symmetric-normalized adjacency with self-loops. Only the first
//! layer propagates over the graph; the output layer is node-wise.

mod checkpoint;
mod train;

pub use checkpoint::{load_params, save_params};
pub use train::{train, train_traced, TrainConfig, TrainingSet};

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::error::{CegaError, Result};
use crate::graph::{FeatureMatrix, SparseOperator};
use crate::rng;

pub const DEFAULT_HIDDEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl GcnParams {
    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if self.w2.nrows() != self.hidden_dim() || self.b2.len() != self.num_classes() {
            return Err(CegaError::Structural(format!(
                "inconsistent parameter shapes: w1 {:?}, w2 {:?}, b2 {}",
                self.w1.dim(),
                self.w2.dim(),
                self.b2.len()
            )));
        }
        let all = self.w1.iter().chain(self.w2.iter()).chain(self.b2.iter());
        if let Some(v) = all.into_iter().find(|v| !v.is_finite()) {
            return Err(CegaError::Structural(format!("non-finite parameter {v}")));
        }
        Ok(())
    }
}

/// Glorot-uniform weights, zero output bias.
pub fn init_params(d: usize, h: usize, c: usize, seed: u64) -> GcnParams {
    assert!(d >= 1 && h >= 1 && c >= 1, "layer sizes must be positive");
    let mut r = rng::rng_from(seed);
    let mut glorot = |rows: usize, cols: usize| {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        Array2::from_shape_simple_fn((rows, cols), || r.random_range(-bound..bound))
    };
    let w1 = glorot(d, h);
    let w2 = glorot(h, c);
    GcnParams {
        w1,
        w2,
        b2: Array1::zeros(c),
    }
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Post-activation hidden layer, `N × h`.
    pub hidden: Array2<f64>,
    pub logits: Array2<f64>,
    pub softmax: Array2<f64>,
}

pub fn forward(params: &GcnParams, norm_adj: &SparseOperator, x: &FeatureMatrix) -> Result<ForwardCache> {
    forward_dense(params, norm_adj, x.values())
}

pub(crate) fn forward_dense(params: &GcnParams, s: &SparseOperator, x: &Array2<f64>) -> Result<ForwardCache> {
    if x.nrows() != s.dim() {
        return Err(CegaError::Structural(format!(
            "features have {} rows but the graph has {} nodes",
            x.nrows(),
            s.dim()
        )));
    }
    if x.ncols() != params.input_dim() {
        return Err(CegaError::Structural(format!(
            "features have dimension {} but the model expects {}",
            x.ncols(),
            params.input_dim()
        )));
    }
    let mut hidden = s.mul_dense(&x.dot(&params.w1));
    hidden.mapv_inplace(|v| v.max(0.0));
    let logits = hidden.dot(&params.w2) + &params.b2;
    let softmax = softmax_rows(&logits);
    Ok(ForwardCache {
        hidden,
        logits,
        softmax,
    })
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        row /= z;
    }
    out
}

/// Index of the largest entry; ties go to the smaller index.
pub fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn argmax_rows(m: &Array2<f64>) -> Vec<usize> {
    m.axis_iter(Axis(0)).map(argmax).collect()
}

pub const LOG_FLOOR: f64 = 1e-12;

/// Mean of `-ln p[node][label]` over the training nodes.
pub fn cross_entropy_loss(cache: &ForwardCache, set: &TrainingSet) -> Result<f64> {
    if set.is_empty() {
        return Err(CegaError::Usage("cross-entropy over an empty mask".into()));
    }
    let total: f64 = set
        .iter()
        .map(|(node, label)| {
            let p = cache.softmax[[node, label]];
            // keeps NaN, unlike f64::max
            -(if p < LOG_FLOOR { LOG_FLOOR } else { p }).ln()
        })
        .sum();
    Ok(total / set.len() as f64)
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Loss and analytic parameter gradients for one full-batch pass.
pub fn loss_and_gradients(
    params: &GcnParams,
    s: &SparseOperator,
    x: &Array2<f64>,
    set: &TrainingSet,
) -> Result<(f64, Gradients)> {
    let cache = forward_dense(params, s, x)?;
    let loss = cross_entropy_loss(&cache, set)?;

    let n = x.nrows();
    let c = params.num_classes();
    let scale = 1.0 / set.len() as f64;
    let mut dlogits = Array2::<f64>::zeros((n, c));
    for (node, label) in set.iter() {
        let mut row = dlogits.row_mut(node);
        row.scaled_add(scale, &cache.softmax.row(node));
        row[label] -= scale;
    }

    let w2 = cache.hidden.t().dot(&dlogits);
    let b2 = dlogits.sum_axis(Axis(0));
    let mut dpre = dlogits.dot(&params.w2.t());
    ndarray::Zip::from(&mut dpre)
        .and(&cache.hidden)
        .for_each(|g, &h| {
            if h <= 0.0 {
                *g = 0.0
            }
        });
    let w1 = x.t().dot(&s.transpose_mul_dense(&dpre));
    Ok((loss, Gradients { w1, w2, b2 }))
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub labels: Vec<usize>,
    pub softmax: Array2<f64>,
    pub embeddings: Array2<f64>,
}

pub fn predict_embed(params: &GcnParams, norm_adj: &SparseOperator, x: &FeatureMatrix) -> Result<Prediction> {
    let cache = forward(params, norm_adj, x)?;
    Ok(Prediction {
        labels: argmax_rows(&cache.softmax),
        softmax: cache.softmax,
        embeddings: cache.hidden,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_csr, normalized_adjacency};
    use ndarray::{arr1, arr2, Array2};
    use proptest::prelude::{prop_assert, proptest};

    #[test]
    fn init_bias_zero_and_deterministic() {
        let p = init_params(100, 16, 4, 3);
        assert!(p.b2.iter().all(|&v| v == 0.0));
        assert_eq!(p, init_params(100, 16, 4, 3));
        let bound = (6.0f64 / 116.0).sqrt();
        assert!(p.w1.iter().all(|v| v.abs() <= bound));
        assert!(p.w2.iter().all(|v| v.abs() <= (6.0f64 / 20.0).sqrt()));
    }

    #[test]
    fn zero_weights_give_uniform_softmax() {
        let g = build_csr(&[(0, 1)], 3, true).unwrap();
        let s = normalized_adjacency(&g);
        let x = FeatureMatrix::new(Array2::from_elem((3, 2), 1.3)).unwrap();
        let p = GcnParams {
            w1: Array2::zeros((2, 4)),
            w2: Array2::zeros((4, 3)),
            b2: Array1::zeros(3),
        };
        let pred = predict_embed(&p, &s, &x).unwrap();
        assert!(pred.embeddings.iter().all(|&v| v == 0.0));
        assert!(pred.softmax.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(pred.labels, vec![0, 0, 0]);
    }

    #[test]
    fn single_node_hand_evaluation() {
        let g = build_csr(&[], 1, true).unwrap();
        let s = normalized_adjacency(&g);
        let x = FeatureMatrix::new(arr2(&[[1.0, -2.0]])).unwrap();
        let p = GcnParams {
            w1: arr2(&[[1.0, 0.5], [0.25, -1.0]]),
            w2: arr2(&[[1.0, -1.0], [0.0, 2.0]]),
            b2: arr1(&[0.1, -0.2]),
        };
        // pre = [1 - 0.5, 0.5 + 2] = [0.5, 2.5]; logits = [0.5 + 0.1, -0.5 + 5 - 0.2]
        let l0: f64 = 0.6;
        let l1: f64 = 4.3;
        let z = l0.exp() + l1.exp();
        let cache = forward(&p, &s, &x).unwrap();
        assert!((cache.softmax[[0, 0]] - l0.exp() / z).abs() < 1e-9);
        assert!((cache.softmax[[0, 1]] - l1.exp() / z).abs() < 1e-9);
    }

    #[test]
    fn argmax_tie_goes_low() {
        assert_eq!(argmax(arr1(&[2.0, 2.0, 1.0]).view()), 0);
        assert_eq!(argmax(arr1(&[1.0, 3.0, 3.0]).view()), 1);
    }

    #[test]
    fn dimension_mismatch() {
        let s = normalized_adjacency(&build_csr(&[], 2, true).unwrap());
        let x = FeatureMatrix::new(Array2::zeros((2, 3))).unwrap();
        let p = init_params(4, 2, 2, 0);
        assert!(matches!(forward(&p, &s, &x), Err(CegaError::Structural(_))));
    }

    fn cache_with(probs: Array2<f64>) -> ForwardCache {
        ForwardCache {
            hidden: Array2::zeros((probs.nrows(), 1)),
            logits: probs.mapv(f64::ln),
            softmax: probs,
        }
    }

    #[test]
    fn loss_cases() {
        let perfect = cache_with(arr2(&[[1.0, 0.0], [0.0, 1.0]]));
        let set = TrainingSet::new(vec![0, 1], vec![0, 1]).unwrap();
        assert!(cross_entropy_loss(&perfect, &set).unwrap() <= 1e-9);

        let uniform = cache_with(Array2::from_elem((1, 4), 0.25));
        let one = TrainingSet::new(vec![0], vec![2]).unwrap();
        assert!((cross_entropy_loss(&uniform, &one).unwrap() - 4f64.ln()).abs() < 1e-12);

        let mixed = cache_with(arr2(&[[0.5, 0.5, 0.0, 0.0], [0.25, 0.25, 0.25, 0.25]]));
        let both = TrainingSet::new(vec![0, 1], vec![1, 3]).unwrap();
        let want = (2f64.ln() + 4f64.ln()) / 2.0;
        assert!((cross_entropy_loss(&mixed, &both).unwrap() - want).abs() < 1e-12);

        let empty = TrainingSet::new(vec![], vec![]).unwrap();
        assert!(matches!(cross_entropy_loss(&uniform, &empty), Err(CegaError::Usage(_))));
    }

    proptest! {
        #[test]
        fn softmax_rows_are_distributions(vals in proptest::collection::vec(-50.0f64..50.0, 12)) {
            let m = Array2::from_shape_vec((3, 4), vals).unwrap();
            let s = softmax_rows(&m);
            for row in s.rows() {
                prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
                prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }

        #[test]
        fn hidden_is_nonnegative(seed in 0u64..1000) {
            let g = build_csr(&[(0, 1), (1, 2), (2, 3)], 4, true).unwrap();
            let s = normalized_adjacency(&g);
            let mut r = rng::rng_from(seed);
            let x = FeatureMatrix::new(Array2::from_shape_simple_fn((4, 3), || r.random_range(-3.0..3.0))).unwrap();
            let p = init_params(3, 5, 2, seed);
            let c = forward(&p, &s, &x).unwrap();
            prop_assert!(c.hidden.iter().all(|&v| v >= 0.0));
            for row in c.softmax.rows() {
                prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
            }
        }
    }
}
