//! The extraction protocol: a frozen target behind a label oracle, an
//! initial query set, the iterative selection loop, and evaluation of the
//! resulting surrogate.

mod harness;
mod metrics;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{CegaError, Result};
use crate::gcn::TrainConfig;
use crate::scoring::{DiversityConfig, PageRankConfig, PerturbationConfig};
use crate::selection::{AgeConfig, WeightSchedule};

pub use harness::{
    audit_run, first_cycle_scores, init_query_set, run_ablation, run_extraction, train_final, train_target, CycleRecord, ExtractionRun,
    InitialSet, Scenario,
};
pub use metrics::{evaluate_labels, performance_gap, EvalReport, PerformanceGap};
pub use oracle::QueryOracle;

/// Node-selection strategy run inside the extraction loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Cega,
    Random,
    Age,
}

impl Selector {
    pub fn name(self) -> &'static str {
        match self {
            Selector::Cega => "cega",
            Selector::Random => "random",
            Selector::Age => "age",
        }
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyMode {
    #[default]
    Entropy,
    Perturbation,
}

/// One of the three CEGA criteria, in weight order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Centrality,
    Uncertainty,
    Diversity,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Centrality, Criterion::Uncertainty, Criterion::Diversity];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Centrality => "centrality",
            Criterion::Uncertainty => "uncertainty",
            Criterion::Diversity => "diversity",
        }
    }
}

/// How the initial query set is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// `init_per_class` nodes from each ground-truth class in the pool.
    #[default]
    Stratified,
    /// `init_per_class · C` nodes uniformly from the pool.
    Random,
}

/// Everything about an extraction run except the selector, budget and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionSettings {
    pub init: InitMode,
    pub init_per_class: usize,
    /// Nodes queried per cycle (κ).
    pub per_cycle: usize,
    /// Warm-start epochs for each interim model.
    pub interim_epochs: usize,
    /// Optimizer settings; `epochs` applies to the initial model.
    pub train: TrainConfig,
    pub uncertainty: UncertaintyMode,
    pub weights: WeightSchedule,
    /// Criteria whose weight is forced to zero.
    pub ablate: Vec<Criterion>,
    pub perturb: PerturbationConfig,
    pub diversity: DiversityConfig,
    pub pagerank: PageRankConfig,
    pub age: AgeConfig,
    /// Evaluate interim models whenever the queried count is a multiple of C.
    pub evaluate_interim: bool,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        ExtractionSettings {
            init: InitMode::Stratified,
            init_per_class: 2,
            per_cycle: 1,
            interim_epochs: 1,
            train: TrainConfig::default(),
            uncertainty: UncertaintyMode::Entropy,
            weights: WeightSchedule::default(),
            ablate: Vec::new(),
            perturb: PerturbationConfig::default(),
            diversity: DiversityConfig::default(),
            pagerank: PageRankConfig::default(),
            age: AgeConfig::default(),
            evaluate_interim: true,
        }
    }
}

impl ExtractionSettings {
    pub fn validate(&self) -> Result<()> {
        if self.init_per_class == 0 {
            return Err(CegaError::Config("init_per_class must be at least 1".into()));
        }
        if self.per_cycle == 0 {
            return Err(CegaError::Config("per_cycle must be at least 1".into()));
        }
        if self.interim_epochs == 0 {
            return Err(CegaError::Config("interim_epochs must be at least 1".into()));
        }
        if self.age.warmup_epochs == 0 {
            return Err(CegaError::Config("age.warmup_epochs must be at least 1".into()));
        }
        self.train.validate()?;
        self.weights.validate()?;
        self.perturb.validate()?;
        self.diversity.validate()?;
        self.pagerank.validate()
    }
}

/// A single extraction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionConfig {
    pub settings: ExtractionSettings,
    pub selector: Selector,
    /// Total query budget B, including the initial set.
    pub total_budget: usize,
    /// Root of every random stream the run consumes.
    pub seed: u64,
}

impl ExtractionConfig {
    pub fn new(settings: ExtractionSettings, selector: Selector, total_budget: usize, seed: u64) -> Self {
        ExtractionConfig {
            settings,
            selector,
            total_budget,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_round_trip() {
        let s = ExtractionSettings {
            ablate: vec![Criterion::Diversity],
            uncertainty: UncertaintyMode::Perturbation,
            ..Default::default()
        };
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ExtractionSettings>(&json).unwrap(), s);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ExtractionSettings>(r#"{"per_cyle": 2}"#).is_err());
        assert!(serde_json::from_str::<Selector>(r#""grain""#).is_err());
    }

    #[test]
    fn zero_per_cycle_rejected() {
        let s = ExtractionSettings {
            per_cycle: 0,
            ..Default::default()
        };
        assert!(matches!(s.validate(), Err(CegaError::Config(_))));
    }
}
