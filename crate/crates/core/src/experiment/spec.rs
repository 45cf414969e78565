use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CegaError, Result};
use crate::extraction::{ExtractionSettings, Selector};
use crate::gcn::TrainConfig;
use crate::graph::{PartitionConfig, SbmConfig};

/// Where the graph comes from: a generated block model or a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    Sbm(SbmConfig),
    Path(PathBuf),
}

/// One experiment: a dataset, the protocol settings, and the grid of
/// selectors × budgets × seeds to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset: DatasetSource,
    /// Root seed. Dataset, split and target derive from it, and so does
    /// every replica stream.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub target: TrainConfig,
    #[serde(default)]
    pub final_train: TrainConfig,
    #[serde(default)]
    pub extraction: ExtractionSettings,
    pub budgets: Vec<usize>,
    pub selectors: Vec<Selector>,
    /// Replica labels.
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentSpec {
    /// Parse a JSON spec. Errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CegaError::Config(format!("field `{path}`: {}", e.into_inner()))
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CegaError::io(path, e))?;
        ExperimentSpec::from_json(&text)
    }

    /// Every field spelled out, defaults included.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Compact JSON of everything that affects results. The output
    /// location is blanked so the same run written elsewhere is identical.
    pub fn canonical_json(&self) -> String {
        let mut s = self.clone();
        s.output_dir = PathBuf::new();
        serde_json::to_string(&s).expect("spec serializes")
    }

    /// SHA-256 of [`ExperimentSpec::canonical_json`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn max_budget(&self) -> usize {
        self.budgets.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(CegaError::Config(format!("field `{field}`: {msg}")));
        if self.budgets.is_empty() {
            return bad("budgets", "must not be empty");
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return bad("budgets", "must be strictly increasing");
        }
        if self.budgets[0] == 0 {
            return bad("budgets", "must be positive");
        }
        if self.seeds.is_empty() {
            return bad("seeds", "must not be empty");
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return bad("seeds", "must not repeat");
        }
        if self.selectors.is_empty() {
            return bad("selectors", "must not be empty");
        }
        let mut sel = self.selectors.clone();
        sel.sort_unstable();
        if sel.windows(2).any(|w| w[0] == w[1]) {
            return bad("selectors", "must not repeat");
        }
        if let DatasetSource::Sbm(cfg) = &self.dataset {
            cfg.validate().map_err(|e| CegaError::Config(format!("field `dataset.sbm`: {e}")))?;
        }
        let sub = |field: &str, r: Result<()>| r.map_err(|e| CegaError::Config(format!("field `{field}`: {e}")));
        sub("target", self.target.validate())?;
        sub("final_train", self.final_train.validate())?;
        sub("extraction", self.extraction.validate())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dataset": {"sbm": {"num_nodes": 100, "num_classes": 2, "intra_p": 0.1, "inter_p": 0.01,
                            "feature_dim": 4, "feature_separation": 2.0, "noise_sigma": 1.0}},
        "budgets": [4, 8],
        "selectors": ["cega", "random"],
        "seeds": [0, 1]
    }"#;

    #[test]
    fn minimal_spec_fills_defaults() {
        let s = ExperimentSpec::from_json(MINIMAL).unwrap();
        assert_eq!(s.extraction.per_cycle, 1);
        assert_eq!(s.final_train.epochs, 1000);
        assert_eq!(s.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn round_trip() {
        let s = ExperimentSpec::from_json(MINIMAL).unwrap();
        assert_eq!(ExperimentSpec::from_json(&s.to_json_pretty()).unwrap(), s);
        assert_eq!(s.digest().len(), 64);
        let moved = ExperimentSpec {
            output_dir: "elsewhere".into(),
            ..s.clone()
        };
        assert_eq!(moved.digest(), s.digest());
    }

    #[test]
    fn unknown_selector_names_the_field() {
        let text = MINIMAL.replace(r#""random""#, r#""grain""#);
        let err = ExperimentSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("selectors[1]"), "{err}");
    }

    #[test]
    fn nested_typo_names_the_field() {
        let text = MINIMAL.replace(r#""seeds""#, r#""extraction": {"per_cylce": 2}, "seeds""#);
        let err = ExperimentSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("extraction"), "{err}");
    }

    #[test]
    fn budgets_must_increase() {
        let text = MINIMAL.replace("[4, 8]", "[8, 4]");
        let err = ExperimentSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("budgets"), "{err}");
        assert!(ExperimentSpec::from_json(&MINIMAL.replace("[0, 1]", "[]")).is_err());
    }
}
