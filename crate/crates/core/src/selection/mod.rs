//! Turning scores into a query decision: ranking, the cycle-dependent
//! weight schedule, weighted rank aggregation, and the baseline selectors.

mod age;
mod rank;
mod weights;

pub use age::{
    age_density, age_gamma_shape, age_select, age_select_with_gamma, percentiles, sample_beta_one, AgeConfig,
};
pub use rank::{ranks_from_scores, select_top_k, Direction, RankTable};
pub use weights::{adaptive_weights, WeightSchedule, Weights};

use rand::seq::SliceRandom;

use crate::error::{CegaError, Result};
use crate::rng;

/// Uniform sample of `k` candidates without replacement.
///
/// The first `k` entries of a seeded shuffle, so a smaller `k` under the
/// same seed yields a prefix of a larger one.
pub fn random_select(candidates: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > candidates.len() {
        return Err(CegaError::Usage(format!(
            "cannot pick {k} of {} candidates",
            candidates.len()
        )));
    }
    let mut r = rng::rng_from(seed);
    let mut order = candidates.to_vec();
    order.shuffle(&mut r);
    order.truncate(k);
    Ok(order)
}
