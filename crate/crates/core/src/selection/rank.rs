use super::Weights;
use crate::error::{CegaError, Result};
use crate::scoring::ScoreVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Rank positions (1 = most preferred), parallel to `scores.node_ids()`.
///
/// Ties are broken by ascending node id.
pub fn ranks_from_scores(scores: &ScoreVector, direction: Direction) -> Vec<usize> {
    let ids = scores.node_ids();
    let vals = scores.values();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        let by_score = match direction {
            Direction::HigherBetter => vals[b].total_cmp(&vals[a]),
            Direction::LowerBetter => vals[a].total_cmp(&vals[b]),
        };
        by_score.then(ids[a].cmp(&ids[b]))
    });
    let mut ranks = vec![0; vals.len()];
    for (pos, i) in order.into_iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Three rank columns over the same candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    node_ids: Vec<usize>,
    columns: [Vec<usize>; 3],
}

fn is_permutation(ranks: &[usize]) -> bool {
    let mut seen = vec![false; ranks.len()];
    ranks.iter().all(|&r| {
        r >= 1 && r <= seen.len() && !std::mem::replace(&mut seen[r - 1], true)
    })
}

impl RankTable {
    pub fn new(node_ids: Vec<usize>, rank1: Vec<usize>, rank2: Vec<usize>, rank3: Vec<usize>) -> Result<Self> {
        for (i, col) in [&rank1, &rank2, &rank3].into_iter().enumerate() {
            if col.len() != node_ids.len() {
                return Err(CegaError::Structural(format!("rank column {} has the wrong length", i + 1)));
            }
            if !is_permutation(col) {
                return Err(CegaError::Structural(format!("rank column {} is not a permutation", i + 1)));
            }
        }
        Ok(RankTable {
            node_ids,
            columns: [rank1, rank2, rank3],
        })
    }

    /// Rank three score vectors over the same candidate ids.
    pub fn from_scores(scores: [(&ScoreVector, Direction); 3]) -> Result<Self> {
        let ids = scores[0].0.node_ids();
        if scores.iter().any(|(s, _)| s.node_ids() != ids) {
            return Err(CegaError::Usage("score vectors cover different candidates".into()));
        }
        let [a, b, c] = scores.map(|(s, d)| ranks_from_scores(s, d));
        RankTable::new(ids.to_vec(), a, b, c)
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    pub fn column(&self, i: usize) -> &[usize] {
        &self.columns[i]
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn combined(&self, w: &Weights) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                w.0[0] * self.columns[0][i] as f64
                    + w.0[1] * self.columns[1][i] as f64
                    + w.0[2] * self.columns[2][i] as f64
            })
            .collect()
    }
}

/// The `k` candidates with the smallest weighted rank sum, best first.
pub fn select_top_k(table: &RankTable, weights: &Weights, k: usize) -> Result<Vec<usize>> {
    if k > table.len() {
        return Err(CegaError::Usage(format!("cannot select {k} of {} candidates", table.len())));
    }
    let combined = table.combined(weights);
    let ids = table.node_ids();
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| combined[a].total_cmp(&combined[b]).then(ids[a].cmp(&ids[b])));
    Ok(order.into_iter().take(k).map(|i| ids[i]).collect())
}
