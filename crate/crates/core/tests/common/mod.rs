//! Independent reference computations and fixtures shared by the
//! integration tests.
#![allow(dead_code)]

mod fixtures;
#[allow(unused_imports)]
pub use fixtures::{small_experiment, small_spec};

use cega::gcn::{init_params, loss_and_gradients, GcnParams, TrainingSet};
use cega::graph::{build_csr, normalized_adjacency, SparseGraph};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Erdős–Rényi style random graph.
pub fn random_graph(n: usize, p: f64, undirected: bool, seed: u64) -> SparseGraph {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (undirected && v < u) {
                continue;
            }
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    build_csr(&edges, n, undirected).unwrap()
}

/// PageRank by a direct solve of `(I − ξP) r = (1 − ξ)/n · 1`, where
/// column `w` of `P` spreads `w`'s score over its out-neighbours, or over
/// every node when `w` has none.
pub fn dense_pagerank(g: &SparseGraph, damping: f64) -> Vec<f64> {
    let n = g.num_nodes();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for w in 0..n {
        let out = g.neighbors(w);
        if out.is_empty() {
            for v in 0..n {
                p[(v, w)] = 1.0 / n as f64;
            }
        } else {
            for &v in out {
                p[(v, w)] += 1.0 / out.len() as f64;
            }
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - p * damping;
    let b = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let r = a.lu().solve(&b).expect("I − ξP is nonsingular");
    r.iter().copied().collect()
}

/// `D^{-1/2}(A + I)D^{-1/2}` built entry by entry from an edge list.
pub fn dense_normalized_adjacency(n: usize, edges: &[(usize, usize)]) -> Array2<f64> {
    let mut a = Array2::<f64>::eye(n);
    for &(u, v) in edges {
        if u != v {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
    }
    let d: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] / (d[i] * d[j]).sqrt())
}

/// Mean cross-entropy of the two-layer model, written out with plain loops.
pub fn reference_loss(p: &GcnParams, a_hat: &Array2<f64>, x: &Array2<f64>, nodes: &[usize], labels: &[usize]) -> f64 {
    let n = x.nrows();
    let ax = a_hat.dot(x);
    let pre = ax.dot(&p.w1);
    let hidden = pre.mapv(|v| v.max(0.0));
    let mut total = 0.0;
    for (&v, &y) in nodes.iter().zip(labels) {
        assert!(v < n);
        let logits: Vec<f64> = (0..p.w2.ncols())
            .map(|c| (0..p.w2.nrows()).map(|k| hidden[[v, k]] * p.w2[[k, c]]).sum::<f64>() + p.b2[c])
            .collect();
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logits.iter().map(|l| (l - m).exp()).sum();
        total -= logits[y] - m - z.ln();
    }
    total / nodes.len() as f64
}

pub struct GradientCheck {
    /// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)` over all parameters.
    pub relative_error: f64,
    /// Largest entrywise `|a − n| / max(|a|, |n|)` among entries above 1e-6.
    pub max_entry_error: f64,
    pub entries: usize,
    pub seed: u64,
}

/// Compare analytic gradients with central differences on a random
/// 5-node instance. Seeds whose hidden pre-activations sit within 1e-3 of
/// the ReLU kink are skipped, since differences straddle the kink there.
pub fn gradient_check(step: f64) -> GradientCheck {
    let (n, d, h, c) = (5, 4, 3, 3);
    for seed in 0.. {
        let mut r = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if r.random::<f64>() < 0.5 {
                    edges.push((u, v));
                }
            }
        }
        let x = Array2::from_shape_fn((n, d), |_| r.sample::<f64, _>(StandardNormal));
        let mut params = init_params(d, h, c, seed);
        params.b2 = Array1::from_shape_fn(c, |_| r.sample::<f64, _>(StandardNormal) * 0.1);
        let a_hat = dense_normalized_adjacency(n, &edges);
        let pre = a_hat.dot(&x).dot(&params.w1);
        if pre.iter().any(|v| v.abs() < 1e-3) {
            continue;
        }
        let nodes = vec![0, 2, 4];
        let labels = vec![0, 1, 2];

        let s = normalized_adjacency(&build_csr(&edges, n, true).unwrap());
        let set = TrainingSet::new(nodes.clone(), labels.clone()).unwrap();
        let (_, g) = loss_and_gradients(&params, &s, &x, &set).unwrap();

        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        let central = |p: &GcnParams| reference_loss(p, &a_hat, &x, &nodes, &labels);
        for idx in 0..params.w1.len() {
            let (i, j) = (idx / h, idx % h);
            let mut plus = params.clone();
            plus.w1[[i, j]] += step;
            let mut minus = params.clone();
            minus.w1[[i, j]] -= step;
            numeric.push((central(&plus) - central(&minus)) / (2.0 * step));
            analytic.push(g.w1[[i, j]]);
        }
        for idx in 0..params.w2.len() {
            let (i, j) = (idx / c, idx % c);
            let mut plus = params.clone();
            plus.w2[[i, j]] += step;
            let mut minus = params.clone();
            minus.w2[[i, j]] -= step;
            numeric.push((central(&plus) - central(&minus)) / (2.0 * step));
            analytic.push(g.w2[[i, j]]);
        }
        for k in 0..c {
            let mut plus = params.clone();
            plus.b2[k] += step;
            let mut minus = params.clone();
            minus.b2[k] -= step;
            numeric.push((central(&plus) - central(&minus)) / (2.0 * step));
            analytic.push(g.b2[k]);
        }

        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let relative_error = norm(&diff) / norm(&analytic).max(norm(&numeric));
        let max_entry_error = analytic
            .iter()
            .zip(&numeric)
            .filter(|(a, b)| a.abs().max(b.abs()) > 1e-6)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max);
        return GradientCheck {
            relative_error,
            max_entry_error,
            entries: analytic.len(),
            seed,
        };
    }
    unreachable!()
}
