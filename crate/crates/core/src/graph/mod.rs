//! Graph structures, normalization, synthetic data, partitioning and
//! dataset files.

pub(crate) mod io;
mod norm;
mod partition;
mod sbm;

pub use io::{load_dataset, save_dataset, Dataset};
pub use norm::{normalized_adjacency, SparseOperator};
pub use partition::{split_partition, NodePartition, PartitionConfig};
pub use sbm::{generate_sbm, SbmConfig};

use ndarray::Array2;

use crate::error::{CegaError, Result};

/// Compressed sparse row adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseGraph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    undirected: bool,
}

impl SparseGraph {
    /// Build a deduplicated CSR graph with sorted columns.
    ///
    /// For undirected graphs every edge is stored in both directions. A
    /// self-loop is stored once.
    pub fn from_edges(edges: &[(usize, usize)], num_nodes: usize, undirected: bool) -> Result<Self> {
        let mut pairs = Vec::with_capacity(if undirected { edges.len() * 2 } else { edges.len() });
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(CegaError::Structural(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            pairs.push((u, v));
            if undirected && u != v {
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_offsets = vec![0usize; num_nodes + 1];
        for &(u, _) in &pairs {
            row_offsets[u + 1] += 1;
        }
        for i in 0..num_nodes {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = pairs.into_iter().map(|(_, v)| v).collect();
        let g = SparseGraph {
            num_nodes,
            row_offsets,
            col_indices,
            undirected,
        };
        debug_assert!(g.audit().is_ok());
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Number of stored (directed) entries.
    pub fn num_entries(&self) -> usize {
        self.col_indices.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[u]..self.row_offsets[u + 1]]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.row_offsets[u + 1] - self.row_offsets[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each stored entry once; for undirected graphs only `u <= v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.num_nodes {
            for &v in self.neighbors(u) {
                if !self.undirected || u <= v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Check every CSR invariant.
    pub fn audit(&self) -> Result<()> {
        let bad = |m: String| Err(CegaError::Structural(m));
        if self.row_offsets.len() != self.num_nodes + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                self.row_offsets.len(),
                self.num_nodes + 1
            ));
        }
        if self.row_offsets[0] != 0 || *self.row_offsets.last().unwrap() != self.col_indices.len() {
            return bad("row_offsets do not span col_indices".into());
        }
        for u in 0..self.num_nodes {
            if self.row_offsets[u] > self.row_offsets[u + 1] {
                return bad(format!("row_offsets decrease at row {u}"));
            }
            let row = self.neighbors(u);
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return bad(format!("row {u} is unsorted or has duplicate column {}", w[1]));
                }
            }
            if let Some(&v) = row.last() {
                if v >= self.num_nodes {
                    return bad(format!("column {v} out of range in row {u}"));
                }
            }
        }
        if self.undirected {
            for u in 0..self.num_nodes {
                for &v in self.neighbors(u) {
                    if !self.has_edge(v, u) {
                        return bad(format!("undirected graph missing reverse of ({u}, {v})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Subgraph induced by `nodes`, relabelled to `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<SparseGraph> {
        let mut local = vec![usize::MAX; self.num_nodes];
        for (i, &u) in nodes.iter().enumerate() {
            if u >= self.num_nodes {
                return Err(CegaError::Structural(format!("node {u} out of range")));
            }
            if local[u] != usize::MAX {
                return Err(CegaError::Structural(format!("node {u} listed twice")));
            }
            local[u] = i;
        }
        let mut edges = Vec::new();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in self.neighbors(u) {
                if local[v] != usize::MAX {
                    edges.push((i, local[v]));
                }
            }
        }
        SparseGraph::from_edges(&edges, nodes.len(), self.undirected)
    }
}

/// Convenience wrapper matching the CSR constructor contract.
pub fn build_csr(edges: &[(usize, usize)], num_nodes: usize, undirected: bool) -> Result<SparseGraph> {
    SparseGraph::from_edges(edges, num_nodes, undirected)
}

/// Dense node features, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(CegaError::Structural("feature dimension must be at least 1".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(CegaError::Structural(format!("non-finite feature value {bad}")));
        }
        Ok(FeatureMatrix { values })
    }

    pub fn num_nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Rows for `nodes`, in order.
    pub fn select_rows(&self, nodes: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(ndarray::Axis(0), nodes),
        }
    }
}

/// Ground-truth class per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    num_classes: usize,
    labels: Vec<usize>,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes == 0 {
            return Err(CegaError::Structural("num_classes must be at least 1".into()));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(CegaError::Structural(format!(
                "label {l} at node {i} is not below {num_classes} classes"
            )));
        }
        Ok(LabelVector { num_classes, labels })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn get(&self, node: usize) -> usize {
        self.labels[node]
    }
}
