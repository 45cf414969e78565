use serde::{Deserialize, Serialize};

use super::ScoreVector;
use crate::error::{CegaError, Result};
use crate::graph::SparseGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankConfig {
    pub damping: f64,
    /// Convergence threshold on the L1 change between iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CegaError::Config(format!("damping {} must lie in (0, 1)", self.damping)));
        }
        if !(self.tol > 0.0) {
            return Err(CegaError::Config("pagerank tol must be positive".into()));
        }
        Ok(())
    }
}

/// Power iteration from the uniform vector.
///
/// Each node `w` passes `score(w) / outdeg(w)` along its out-edges (on an
/// undirected graph, to every neighbour). Nodes without out-edges spread
/// their score uniformly over all nodes, so the scores keep summing to 1.
pub fn pagerank(g: &SparseGraph, cfg: &PageRankConfig) -> Result<ScoreVector> {
    cfg.validate()?;
    let n = g.num_nodes();
    if n == 0 {
        return Err(CegaError::Usage("pagerank on an empty graph".into()));
    }
    let nf = n as f64;
    let xi = cfg.damping;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for _ in 0..cfg.max_iter {
        let mut dangling = 0.0;
        next.fill(0.0);
        for w in 0..n {
            let deg = g.out_degree(w);
            if deg == 0 {
                dangling += x[w];
                continue;
            }
            let share = x[w] / deg as f64;
            for &v in g.neighbors(w) {
                next[v] += share;
            }
        }
        let base = (1.0 - xi) / nf + xi * dangling / nf;
        residual = 0.0;
        for (nv, &ov) in next.iter_mut().zip(&x) {
            *nv = base + xi * *nv;
            residual += (*nv - ov).abs();
        }
        std::mem::swap(&mut x, &mut next);
        if residual <= cfg.tol {
            return ScoreVector::new((0..n).collect(), x);
        }
    }
    Err(CegaError::NoConvergence {
        what: "pagerank",
        iterations: cfg.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_csr;

    fn pr(edges: &[(usize, usize)], n: usize, undirected: bool) -> Vec<f64> {
        let g = build_csr(edges, n, undirected).unwrap();
        pagerank(&g, &PageRankConfig::default()).unwrap().values().to_vec()
    }

    #[test]
    fn isolated_node() {
        assert_eq!(pr(&[], 1, true), vec![1.0]);
    }

    #[test]
    fn mutual_pair() {
        for v in pr(&[(0, 1)], 2, true) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn directed_cycle_uniform() {
        for v in pr(&[(0, 1), (1, 2), (2, 0)], 3, false) {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dangling_mass_kept() {
        let v = pr(&[(0, 1), (0, 2)], 3, false);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(v[1] > v[0]);
    }

    #[test]
    fn non_convergence_reported() {
        let g = build_csr(&[(0, 1), (1, 2)], 3, true).unwrap();
        let cfg = PageRankConfig {
            max_iter: 2,
            ..Default::default()
        };
        assert!(matches!(pagerank(&g, &cfg), Err(CegaError::NoConvergence { iterations: 2, .. })));
    }
}
