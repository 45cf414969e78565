use std::collections::BTreeMap;

use crate::error::{CegaError, Result};
use crate::gcn::{argmax_rows, forward, GcnParams};
use crate::graph::{FeatureMatrix, SparseOperator};

/// Label-only access to a deployed target model, with query accounting.
///
/// Each distinct node is charged once; repeated queries return the cached
/// answer for free. A request that would push the distinct count past the
/// budget fails without charging anything.
#[derive(Debug, Clone)]
pub struct QueryOracle {
    predictions: Vec<usize>,
    budget: Option<usize>,
    answered: BTreeMap<usize, usize>,
}

impl QueryOracle {
    /// `budget = None` disables accounting (full-subgraph reference runs).
    pub fn new(target: &GcnParams, norm_adj: &SparseOperator, x: &FeatureMatrix, budget: Option<usize>) -> Result<Self> {
        let cache = forward(target, norm_adj, x)?;
        Ok(QueryOracle::from_predictions(argmax_rows(&cache.softmax), budget))
    }

    pub fn from_predictions(predictions: Vec<usize>, budget: Option<usize>) -> Self {
        QueryOracle {
            predictions,
            budget,
            answered: BTreeMap::new(),
        }
    }

    pub fn query(&mut self, nodes: &[usize]) -> Result<Vec<usize>> {
        if let Some(&bad) = nodes.iter().find(|&&v| v >= self.predictions.len()) {
            return Err(CegaError::Usage(format!("query for node {bad} outside the graph")));
        }
        let mut fresh: Vec<usize> = nodes.iter().copied().filter(|v| !self.answered.contains_key(v)).collect();
        fresh.sort_unstable();
        fresh.dedup();
        if let Some(b) = self.budget {
            let requested = self.answered.len() + fresh.len();
            if requested > b {
                return Err(CegaError::BudgetExceeded { requested, budget: b });
            }
        }
        for v in fresh {
            self.answered.insert(v, self.predictions[v]);
        }
        Ok(nodes.iter().map(|v| self.answered[v]).collect())
    }

    /// Distinct nodes charged so far.
    pub fn queries_charged(&self) -> usize {
        self.answered.len()
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    pub fn is_reference(&self) -> bool {
        self.budget.is_none()
    }

    /// Target predictions for every node. Only evaluation code should look
    /// at these; extraction goes through [`QueryOracle::query`].
    pub fn target_labels(&self) -> &[usize] {
        &self.predictions
    }
}
