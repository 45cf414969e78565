use serde::{Deserialize, Serialize};

use crate::error::{CegaError, Result};

/// Test-set agreement of one model with ground truth and with the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub fidelity: f64,
    pub macro_f1: f64,
    pub num_test: usize,
}

/// Score predicted labels on `test`.
///
/// Macro-F1 averages per-class F1 over all `num_classes` classes; a class
/// with no true or predicted test node contributes 0.
pub fn evaluate_labels(
    predicted: &[usize],
    target: &[usize],
    truth: &[usize],
    test: &[usize],
    num_classes: usize,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(CegaError::Usage("evaluation on an empty test set".into()));
    }
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fn_ = vec![0usize; num_classes];
    let (mut correct, mut agree) = (0usize, 0usize);
    for &v in test {
        let (p, y) = (predicted[v], truth[v]);
        if p == y {
            correct += 1;
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[y] += 1;
        }
        if p == target[v] {
            agree += 1;
        }
    }
    let f1_sum: f64 = (0..num_classes)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fn_[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum();
    let n = test.len() as f64;
    Ok(EvalReport {
        accuracy: correct as f64 / n,
        fidelity: agree as f64 / n,
        macro_f1: f1_sum / num_classes as f64,
        num_test: test.len(),
    })
}

/// `full − budget` for each metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceGap {
    pub accuracy: f64,
    pub fidelity: f64,
    pub macro_f1: f64,
}

pub fn performance_gap(full: &EvalReport, budget: &EvalReport) -> PerformanceGap {
    PerformanceGap {
        accuracy: full.accuracy - budget.accuracy,
        fidelity: full.fidelity - budget.fidelity,
        macro_f1: full.macro_f1 - budget.macro_f1,
    }
}
