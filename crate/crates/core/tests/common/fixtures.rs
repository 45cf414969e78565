use cega::experiment::{Experiment, ExperimentSpec};

/// 200-node, 4-class SBM with short training so tests stay fast.
pub fn small_spec(extra: &str) -> ExperimentSpec {
    ExperimentSpec::from_json(&format!(
        r#"{{
            "dataset": {{"sbm": {{"num_nodes": 200, "num_classes": 4, "intra_p": 0.1, "inter_p": 0.01,
                                "feature_dim": 16, "feature_separation": 2.0, "noise_sigma": 1.0}}}},
            "seed": 5,
            "partition": {{"pool_fraction": 0.5}},
            "target": {{"learning_rate": 0.01, "epochs": 200}},
            "final_train": {{"learning_rate": 0.01, "epochs": 200}},
            "extraction": {{"train": {{"learning_rate": 0.01, "epochs": 200}}}},
            {extra}
        }}"#
    ))
    .unwrap()
}

pub fn small_experiment(extra: &str) -> Experiment {
    Experiment::prepare(small_spec(extra)).unwrap()
}
