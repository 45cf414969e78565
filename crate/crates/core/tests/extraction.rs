mod common;

use cega::extraction::{audit_run, run_extraction, Selector};
use common::small_experiment;
use proptest::prelude::*;

const GRID: &str = r#""budgets": [8, 24, 40], "selectors": ["cega", "random", "age"], "seeds": [0, 1]"#;

#[test]
fn smaller_budget_runs_are_prefixes_of_larger_ones() {
    let exp = small_experiment(GRID);
    for sel in [Selector::Cega, Selector::Random, Selector::Age] {
        let full = run_extraction(exp.scenario(), &exp.extraction_config(sel, 40, 3)).unwrap();
        let short = run_extraction(exp.scenario(), &exp.extraction_config(sel, 17, 3)).unwrap();
        assert_eq!(short.queried, full.queried[..17], "{sel}");
        assert_eq!(short.oracle_labels, full.oracle_labels[..17]);
        assert_eq!(full.prefix(17).0, &short.queried[..]);
    }
}

#[test]
fn target_agrees_with_itself() {
    let exp = small_experiment(GRID);
    let report = exp.scenario().evaluate(exp.scenario().target()).unwrap();
    assert_eq!(report.fidelity, 1.0);
}

#[test]
fn repeated_runs_produce_identical_records() {
    let exp = small_experiment(GRID);
    let cfg = exp.extraction_config(Selector::Cega, 24, 1);
    let a = run_extraction(exp.scenario(), &cfg).unwrap();
    let b = run_extraction(exp.scenario(), &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.interim, b.interim);
}

#[test]
fn larger_budget_raises_mean_fidelity() {
    let exp = small_experiment(r#""budgets": [8, 80], "selectors": ["cega"], "seeds": [0, 1, 2, 3, 4]"#);
    let (mut lo, mut hi) = (0.0, 0.0);
    for seed in 0..5 {
        let rows = exp.run_replica(Selector::Cega, seed).unwrap().results;
        lo += rows[0].report.fidelity;
        hi += rows[1].report.fidelity;
    }
    assert!(hi > lo, "{hi} vs {lo}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_run_passes_the_audit(
        budget in 8usize..60,
        per_cycle in 1usize..7,
        sel in prop_oneof![Just(Selector::Cega), Just(Selector::Random), Just(Selector::Age)],
        seed in 0u64..1000,
    ) {
        let exp = small_experiment(GRID);
        let mut cfg = exp.extraction_config(sel, budget, seed);
        cfg.settings.per_cycle = per_cycle;
        cfg.settings.evaluate_interim = false;
        let run = run_extraction(exp.scenario(), &cfg).unwrap();
        prop_assert!(audit_run(&run, per_cycle).is_ok());
        prop_assert_eq!(run.queried.len(), budget);
        let mut seen = run.queried.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), budget);
        prop_assert!(run.queried.iter().all(|v| exp.scenario().pool().binary_search(v).is_ok()));
    }
}
