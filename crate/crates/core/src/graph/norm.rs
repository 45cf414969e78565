use ndarray::Array2;

use super::SparseGraph;

/// Weighted CSR matrix, used for the normalized propagation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.row_offsets[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `self * rhs`. Each output row is reduced in column order, so the
    /// result does not depend on how rows are scheduled.
    pub fn mul_dense(&self, rhs: &Array2<f64>) -> Array2<f64> {
        assert_eq!(rhs.nrows(), self.n, "operator/matrix dimension mismatch");
        let mut out = Array2::<f64>::zeros((self.n, rhs.ncols()));
        for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for (j, w) in self.row(i) {
                out_row.scaled_add(w, &rhs.row(j));
            }
        }
        out
    }

    /// `selfᵀ * rhs`.
    pub fn transpose_mul_dense(&self, rhs: &Array2<f64>) -> Array2<f64> {
        assert_eq!(rhs.nrows(), self.n, "operator/matrix dimension mismatch");
        let mut out = Array2::<f64>::zeros((self.n, rhs.ncols()));
        for i in 0..self.n {
            let src = rhs.row(i);
            for (j, w) in self.row(i) {
                out.row_mut(j).scaled_add(w, &src);
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                d[[i, j]] = w;
            }
        }
        d
    }
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` where `D̂` is the row degree of `A + I`.
///
/// An existing self-loop is not doubled.
pub fn normalized_adjacency(g: &SparseGraph) -> SparseOperator {
    let n = g.num_nodes();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(g.num_entries() + n);
    row_offsets.push(0);
    for i in 0..n {
        let row = g.neighbors(i);
        let pos = row.partition_point(|&j| j < i);
        col_indices.extend_from_slice(&row[..pos]);
        col_indices.push(i);
        let rest = if row.get(pos) == Some(&i) { pos + 1 } else { pos };
        col_indices.extend_from_slice(&row[rest..]);
        row_offsets.push(col_indices.len());
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| 1.0 / ((row_offsets[i + 1] - row_offsets[i]) as f64).sqrt())
        .collect();
    let mut values = Vec::with_capacity(col_indices.len());
    for i in 0..n {
        for &j in &col_indices[row_offsets[i]..row_offsets[i + 1]] {
            values.push(inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    SparseOperator {
        n,
        row_offsets,
        col_indices,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_csr;
    use proptest::prelude::*;

    #[test]
    fn isolated_node() {
        let s = normalized_adjacency(&build_csr(&[], 1, true).unwrap());
        assert_eq!(s.to_dense(), ndarray::arr2(&[[1.0]]));
    }

    #[test]
    fn single_edge_all_half() {
        let s = normalized_adjacency(&build_csr(&[(0, 1)], 2, true).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.get(i, j) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn path_graph_entry() {
        let s = normalized_adjacency(&build_csr(&[(0, 1), (1, 2)], 3, true).unwrap());
        // degrees of A+I are (2, 3, 2)
        assert!((s.get(0, 1) - 1.0 / (6.0f64).sqrt()).abs() < 1e-15);
        assert!((s.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.get(0, 2), 0.0);
    }

    #[test]
    fn existing_self_loop_not_doubled() {
        let with = normalized_adjacency(&build_csr(&[(0, 1), (0, 0)], 2, true).unwrap());
        let without = normalized_adjacency(&build_csr(&[(0, 1)], 2, true).unwrap());
        assert_eq!(with, without);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            n in 1usize..15,
            raw in proptest::collection::vec((0usize..15, 0usize..15), 0..40),
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
            let g = build_csr(&edges, n, true).unwrap();
            let s = normalized_adjacency(&g);
            let d = s.to_dense();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((d[[i, j]] - d[[j, i]]).abs() <= 1e-12);
                }
            }
            let max_deg = (0..n).map(|i| s.row(i).count()).max().unwrap() as f64;
            let ones = Array2::ones((n, 1));
            let y = s.mul_dense(&ones);
            for i in 0..n {
                prop_assert!(y[[i, 0]] > 0.0 && y[[i, 0]] <= max_deg.sqrt() + 1e-12);
                if g.out_degree(i) == 0 {
                    prop_assert_eq!(y[[i, 0]], 1.0);
                }
            }
            // transpose product agrees with the dense transpose
            let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 3 + j) as f64 * 0.1 - 0.4);
            let t = s.transpose_mul_dense(&x);
            let t_dense = d.t().dot(&x);
            for (a, b) in t.iter().zip(t_dense.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
