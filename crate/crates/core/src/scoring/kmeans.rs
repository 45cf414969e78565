use ndarray::{Array2, ArrayView1, Axis};
use rand::Rng;

use super::DiversityConfig;
use crate::error::{CegaError, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step, in order.
    pub inertia_trace: Vec<f64>,
    /// Fewer points than clusters: surplus centroids duplicate points.
    pub degenerate: bool,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        self.inertia_trace.last().copied().unwrap_or(0.0)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.nrows()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid and its Euclidean distance; ties go to the lower index.
pub fn nearest_centroid(point: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.axis_iter(Axis(0)).enumerate() {
        let d = sq_dist(point, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    (best.0, best.1.sqrt())
}

fn plus_plus_seed(points: &Array2<f64>, k: usize, seed: u64) -> Array2<f64> {
    let m = points.nrows();
    let mut r = rng::rng_from(seed);
    let mut chosen = vec![r.random_range(0..m)];
    let mut d2: Vec<f64> = (0..m).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = r.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = m - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All remaining points coincide with a chosen one.
            (0..m).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    points.select(Axis(0), &chosen)
}

/// k-means++ seeding followed by Lloyd iterations.
///
/// Stops when no centroid moves more than `cfg.kmeans_tol` (L2) or after
/// `cfg.kmeans_max_iter` iterations. An empty cluster is reseeded at the
/// point farthest from its current centroid.
pub fn kmeans_fit(points: &Array2<f64>, k: usize, cfg: &DiversityConfig) -> Result<KMeansFit> {
    let m = points.nrows();
    if m == 0 || k == 0 {
        return Err(CegaError::Usage(format!("k-means needs points and clusters (m={m}, k={k})")));
    }
    if m < k {
        let idx: Vec<usize> = (0..k).map(|i| i % m).collect();
        return Ok(KMeansFit {
            centroids: points.select(Axis(0), &idx),
            assignments: (0..m).collect(),
            inertia_trace: vec![0.0],
            degenerate: true,
        });
    }

    let mut centroids = plus_plus_seed(points, k, cfg.kmeans_seed);
    let mut assignments = vec![0usize; m];
    let mut dists = vec![0.0f64; m];
    let mut trace = Vec::new();

    let assign = |centroids: &Array2<f64>, assignments: &mut [usize], dists: &mut [f64]| -> f64 {
        let mut inertia = 0.0;
        for i in 0..m {
            let (c, d) = nearest_centroid(points.row(i), centroids);
            assignments[i] = c;
            dists[i] = d;
            inertia += d * d;
        }
        inertia
    };

    for _ in 0..cfg.kmeans_max_iter.max(1) {
        trace.push(assign(&centroids, &mut assignments, &mut dists));

        let mut sums = Array2::<f64>::zeros(centroids.raw_dim());
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            sums.row_mut(c).scaled_add(1.0, &points.row(i));
            counts[c] += 1;
        }
        let mut far: Vec<usize> = (0..m).collect();
        far.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
        let mut far = far.into_iter();

        let mut moved = 0.0f64;
        for c in 0..k {
            let new = if counts[c] > 0 {
                sums.row(c).mapv(|v| v / counts[c] as f64)
            } else {
                points.row(far.next().expect("m >= k")).to_owned()
            };
            moved = moved.max(sq_dist(new.view(), centroids.row(c)).sqrt());
            centroids.row_mut(c).assign(&new);
        }
        if moved <= cfg.kmeans_tol {
            break;
        }
    }
    trace.push(assign(&centroids, &mut assignments, &mut dists));

    Ok(KMeansFit {
        centroids,
        assignments,
        inertia_trace: trace,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use proptest::prelude::*;

    fn cfg(seed: u64) -> DiversityConfig {
        DiversityConfig {
            kmeans_seed: seed,
            ..Default::default()
        }
    }

    #[test]
    fn each_point_its_own_centroid() {
        let pts = arr2(&[[0.0, 0.0], [5.0, 1.0], [-3.0, 2.0]]);
        let fit = kmeans_fit(&pts, 3, &cfg(1)).unwrap();
        assert_eq!(fit.inertia(), 0.0);
        let mut sizes = fit.cluster_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 1]);
    }

    #[test]
    fn separated_pairs_give_midpoints() {
        let pts = arr2(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]);
        // Exhaustive oracle over 2-partitions with both parts non-empty.
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..15 {
            let mut cost = 0.0;
            for side in [true, false] {
                let members: Vec<usize> = (0..4).filter(|&i| ((mask >> i) & 1 == 1) == side).collect();
                let mean = pts.select(Axis(0), &members).mean_axis(Axis(0)).unwrap();
                cost += members.iter().map(|&i| sq_dist(pts.row(i), mean.view())).sum::<f64>();
            }
            if cost < best.0 {
                best = (cost, mask);
            }
        }
        let fit = kmeans_fit(&pts, 2, &cfg(3)).unwrap();
        assert!((fit.inertia() - best.0).abs() < 1e-12);
        let mut cs: Vec<(f64, f64)> = fit.centroids.rows().into_iter().map(|r| (r[0], r[1])).collect();
        cs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(cs, vec![(0.0, 0.5), (10.0, 0.5)]);
    }

    #[test]
    fn fewer_points_than_clusters() {
        let pts = arr2(&[[1.0], [2.0]]);
        let fit = kmeans_fit(&pts, 3, &cfg(0)).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.centroids, arr2(&[[1.0], [2.0], [1.0]]));
        assert_eq!(fit.assignments, vec![0, 1]);
    }

    #[test]
    fn duplicate_points() {
        let pts = arr2(&[[1.0], [1.0], [1.0], [4.0]]);
        let fit = kmeans_fit(&pts, 3, &cfg(0)).unwrap();
        assert_eq!(fit.inertia(), 0.0);
    }

    proptest! {
        #[test]
        fn deterministic_and_inertia_nonincreasing(
            raw in proptest::collection::vec(-10.0f64..10.0, 6..60),
            k in 1usize..5,
            seed in 0u64..50,
        ) {
            let m = raw.len() / 2;
            let pts = Array2::from_shape_vec((m, 2), raw[..m * 2].to_vec()).unwrap();
            let a = kmeans_fit(&pts, k, &cfg(seed)).unwrap();
            prop_assert_eq!(&a, &kmeans_fit(&pts, k, &cfg(seed)).unwrap());
            for w in a.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
            for (i, &c) in a.assignments.iter().enumerate() {
                prop_assert_eq!(nearest_centroid(pts.row(i), &a.centroids).0, c);
            }
        }
    }
}
