use rayon::prelude::*;

use super::{DatasetSource, ExperimentSpec};
use crate::error::{CegaError, Result};
use crate::extraction::{
    audit_run, performance_gap, run_extraction, train_target, Criterion, EvalReport, ExtractionConfig, ExtractionRun,
    InitMode, PerformanceGap, Scenario, Selector,
};
use crate::gcn::TrainConfig;
use crate::graph::{generate_sbm, load_dataset, split_partition, Dataset};
use crate::rng;

/// One line of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub selector: String,
    pub budget: usize,
    pub seed: u64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub selector: Selector,
    pub seed: u64,
    pub checkpoint: usize,
    pub report: EvalReport,
}

/// One cycle of the selection log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub cycle: usize,
    pub selected: Vec<usize>,
    pub weights: [f64; 3],
    pub selector: Selector,
}

#[derive(Debug, Clone)]
pub struct ReplicaOutcome {
    pub selector: Selector,
    pub seed: u64,
    pub results: Vec<ResultRow>,
    pub trajectory: Vec<TrajectoryRow>,
    pub log: Vec<LogRow>,
    pub run: ExtractionRun,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub task: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub selector: Selector,
    pub budget: usize,
    pub seed: u64,
    pub gap: PerformanceGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: &'static str,
    pub seed: u64,
    pub report: EvalReport,
}

/// Ablation variants in report order: the full method, then each criterion removed.
pub const ABLATION_VARIANTS: [(&str, Option<Criterion>); 4] = [
    ("full", None),
    ("no_centrality", Some(Criterion::Centrality)),
    ("no_uncertainty", Some(Criterion::Uncertainty)),
    ("no_diversity", Some(Criterion::Diversity)),
];

/// A spec with its dataset generated or loaded and its target trained.
#[derive(Debug, Clone)]
pub struct Experiment {
    spec: ExperimentSpec,
    scenario: Scenario,
}

impl Experiment {
    pub fn prepare(spec: ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let dataset = build_dataset(&spec)?;
        let data_seed = rng::derive_seed(spec.seed, "data");
        let partition = split_partition(dataset.num_nodes(), &spec.partition, data_seed)?;
        let target_cfg = TrainConfig {
            seed: rng::derive_seed(spec.seed, "target") ^ spec.target.seed,
            ..spec.target.clone()
        };
        let target = train_target(&dataset, &partition, &target_cfg)?;
        let scenario = Scenario::new(dataset, partition, target, &spec.extraction.pagerank)?;

        let pool = scenario.pool().len();
        if spec.max_budget() > pool {
            return Err(CegaError::Config(format!(
                "field `budgets`: {} exceeds the candidate pool of {pool} nodes",
                spec.max_budget()
            )));
        }
        let nominal = spec.extraction.init_per_class * scenario.num_classes();
        let initial = match spec.extraction.init {
            InitMode::Stratified => nominal - init_shortfall(&scenario, spec.extraction.init_per_class),
            InitMode::Random => nominal.min(pool),
        };
        if spec.budgets[0] < initial {
            return Err(CegaError::Config(format!(
                "field `budgets`: {} is below the initial query set of {initial} nodes",
                spec.budgets[0]
            )));
        }
        Ok(Experiment { spec, scenario })
    }

    /// The same prepared experiment over different budgets.
    pub fn with_budgets(&self, budgets: Vec<usize>) -> Result<Experiment> {
        let spec = ExperimentSpec {
            budgets,
            ..self.spec.clone()
        };
        spec.validate()?;
        if spec.max_budget() > self.scenario.pool().len() {
            return Err(CegaError::Config("field `budgets`: exceeds the candidate pool".into()));
        }
        Ok(Experiment {
            spec,
            scenario: self.scenario.clone(),
        })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Classes with fewer pool members than the stratified initial draw wants.
    pub fn short_classes(&self) -> Vec<usize> {
        let per_class = self.spec.extraction.init_per_class;
        class_counts(&self.scenario)
            .iter()
            .enumerate()
            .filter(|&(_, &n)| n < per_class)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn replica_seed(&self, seed: u64) -> u64 {
        rng::derive_indexed(self.spec.seed, "replica", seed)
    }

    /// Final-model settings for a replica. Every selector in a replica
    /// shares them, so comparisons are paired.
    pub fn final_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed: rng::derive_seed(self.replica_seed(seed), "final") ^ self.spec.final_train.seed,
            ..self.spec.final_train.clone()
        }
    }

    pub fn extraction_config(&self, selector: Selector, budget: usize, seed: u64) -> ExtractionConfig {
        ExtractionConfig::new(self.spec.extraction.clone(), selector, budget, self.replica_seed(seed))
    }

    /// One query run at the largest budget; each smaller budget is scored
    /// on the matching prefix of the queried list.
    pub fn run_replica(&self, selector: Selector, seed: u64) -> Result<ReplicaOutcome> {
        let cfg = self.extraction_config(selector, self.spec.max_budget(), seed);
        let run = run_extraction(&self.scenario, &cfg)?;
        audit_run(&run, self.spec.extraction.per_cycle)?;
        let final_cfg = self.final_config(seed);
        let mut results = Vec::with_capacity(self.spec.budgets.len());
        for &b in &self.spec.budgets {
            let (nodes, labels) = run.prefix(b);
            let model = self.scenario.train_on(nodes, labels, &final_cfg)?;
            results.push(ResultRow {
                selector: selector.name().to_string(),
                budget: b,
                seed,
                report: self.scenario.evaluate(&model)?,
            });
        }
        let trajectory = run
            .trajectory()
            .into_iter()
            .map(|(checkpoint, report)| TrajectoryRow {
                selector,
                seed,
                checkpoint,
                report,
            })
            .collect();
        let log = run
            .records
            .iter()
            .map(|r| LogRow {
                cycle: r.cycle,
                selected: r.selected.clone(),
                weights: r.weights,
                selector,
            })
            .collect();
        Ok(ReplicaOutcome {
            selector,
            seed,
            results,
            trajectory,
            log,
            run,
        })
    }

    /// Full-subgraph reference for one replica, trained with the replica's
    /// final-model settings.
    pub fn reference(&self, seed: u64) -> Result<ResultRow> {
        let model = self.scenario.train_reference(&self.final_config(seed))?;
        Ok(ResultRow {
            selector: "reference".into(),
            budget: self.scenario.pool().len(),
            seed,
            report: self.scenario.evaluate(&model)?,
        })
    }

    /// CEGA at the largest budget with `ablate` removed.
    pub fn ablation(&self, ablate: Option<Criterion>, seed: u64) -> Result<EvalReport> {
        let mut cfg = self.extraction_config(Selector::Cega, self.spec.max_budget(), seed);
        cfg.settings.ablate = ablate.into_iter().collect();
        let run = run_extraction(&self.scenario, &cfg)?;
        audit_run(&run, self.spec.extraction.per_cycle)?;
        let model = self.scenario.train_on(&run.queried, &run.oracle_labels, &self.final_config(seed))?;
        self.scenario.evaluate(&model)
    }
}

fn class_counts(scenario: &Scenario) -> Vec<usize> {
    let mut counts = vec![0usize; scenario.num_classes()];
    for &v in scenario.pool() {
        counts[scenario.dataset().labels.get(v)] += 1;
    }
    counts
}

fn init_shortfall(scenario: &Scenario, per_class: usize) -> usize {
    class_counts(scenario).iter().map(|&n| per_class.saturating_sub(n)).sum()
}

fn build_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    match &spec.dataset {
        DatasetSource::Sbm(cfg) => {
            let (g, x, y) = generate_sbm(cfg, rng::derive_seed(spec.seed, "data"))?;
            Dataset::new(g, x, y)
        }
        DatasetSource::Path(dir) => load_dataset(dir),
    }
}

/// Dataset the spec describes, without training anything.
pub fn spec_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    build_dataset(spec)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CegaError::Usage(format!("cannot start {jobs} workers: {e}")))
}

/// Run `tasks` on `jobs` workers, keeping input order in the output.
fn run_tasks<T, R, F>(jobs: usize, tasks: &[T], f: F) -> Result<Vec<Result<R>>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    Ok(pool(jobs)?.install(|| tasks.par_iter().map(&f).collect()))
}

/// Everything produced by [`run_grid`], in deterministic order.
#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    pub results: Vec<ResultRow>,
    pub trajectory: Vec<TrajectoryRow>,
    pub logs: Vec<(Selector, u64, Vec<LogRow>)>,
    pub failures: Vec<Failure>,
}

/// Every selector × seed replica, each covering all budgets.
pub fn run_grid(exp: &Experiment, jobs: usize) -> Result<GridOutcome> {
    let spec = exp.spec();
    let tasks: Vec<(Selector, u64)> = spec
        .selectors
        .iter()
        .flat_map(|&s| spec.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let outcomes = run_tasks(jobs, &tasks, |&(s, seed)| exp.run_replica(s, seed))?;
    let mut out = GridOutcome::default();
    for (&(s, seed), r) in tasks.iter().zip(outcomes) {
        match r {
            Ok(o) => {
                out.results.extend(o.results);
                out.trajectory.extend(o.trajectory);
                out.logs.push((s, seed, o.log));
            }
            Err(e) => out.failures.push(Failure {
                task: format!("{s} seed {seed}"),
                error: e.to_string(),
            }),
        }
    }
    Ok(out)
}

/// Reference rows for every seed, plus failures.
pub fn run_references(exp: &Experiment, jobs: usize) -> Result<(Vec<ResultRow>, Vec<Failure>)> {
    let seeds = exp.spec().seeds.clone();
    let outcomes = run_tasks(jobs, &seeds, |&seed| exp.reference(seed))?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in seeds.iter().zip(outcomes) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(Failure {
                task: format!("reference seed {seed}"),
                error: e.to_string(),
            }),
        }
    }
    Ok((rows, failures))
}

/// `reference − result` at the largest budget, matched by seed.
pub fn gaps(exp: &Experiment, results: &[ResultRow], reference: &[ResultRow]) -> Result<Vec<GapRow>> {
    let b = exp.spec().max_budget();
    let mut rows = Vec::new();
    for &s in &exp.spec().selectors {
        for &seed in &exp.spec().seeds {
            let find = |rows: &[ResultRow], name: &str, budget: Option<usize>| {
                rows.iter()
                    .find(|r| r.selector == name && r.seed == seed && budget.is_none_or(|b| r.budget == b))
                    .map(|r| r.report)
            };
            let (Some(full), Some(budgeted)) = (find(reference, "reference", None), find(results, s.name(), Some(b))) else {
                continue;
            };
            rows.push(GapRow {
                selector: s,
                budget: b,
                seed,
                gap: performance_gap(&full, &budgeted),
            });
        }
    }
    Ok(rows)
}

/// The four ablation variants for every seed.
pub fn run_ablations(exp: &Experiment, jobs: usize) -> Result<(Vec<AblationRow>, Vec<Failure>)> {
    let tasks: Vec<(&'static str, Option<Criterion>, u64)> = ABLATION_VARIANTS
        .iter()
        .flat_map(|&(name, c)| exp.spec().seeds.iter().map(move |&seed| (name, c, seed)))
        .collect();
    let outcomes = run_tasks(jobs, &tasks, |&(_, c, seed)| exp.ablation(c, seed))?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&(variant, _, seed), r) in tasks.iter().zip(outcomes) {
        match r {
            Ok(report) => rows.push(AblationRow { variant, seed, report }),
            Err(e) => failures.push(Failure {
                task: format!("{variant} seed {seed}"),
                error: e.to_string(),
            }),
        }
    }
    Ok((rows, failures))
}
