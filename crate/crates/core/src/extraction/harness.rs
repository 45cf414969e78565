use ndarray::Array2;
use rand::Rng;

use super::{
    evaluate_labels, Criterion, EvalReport, ExtractionConfig, InitMode, QueryOracle, Selector, UncertaintyMode,
};
use crate::error::{CegaError, Result};
use crate::gcn::{forward, predict_embed, train, GcnParams, Prediction, TrainConfig, TrainingSet};
use crate::graph::{normalized_adjacency, Dataset, FeatureMatrix, LabelVector, NodePartition, SparseGraph, SparseOperator};
use crate::rng;
use crate::scoring::{
    entropy_scores, kmeans_fit, pagerank, perturbation_scores, diversity_scores, EmbeddingSource, PageRankConfig,
    PerturbationConfig, ScoreVector,
};
use crate::selection::{
    adaptive_weights, age_density, age_gamma_shape, age_select_with_gamma, random_select, sample_beta_one,
    select_top_k, Direction, RankTable,
};

/// Train the target on ground-truth labels of `target_train` over the full graph.
pub fn train_target(dataset: &Dataset, partition: &NodePartition, cfg: &TrainConfig) -> Result<GcnParams> {
    if partition.target_train.is_empty() {
        return Err(CegaError::Usage("target_train is empty".into()));
    }
    let s = normalized_adjacency(&dataset.graph);
    let set = TrainingSet::from_mask(&dataset.labels, &partition.target_train)?;
    train(&s, &dataset.features, &set, dataset.num_classes(), cfg, None)
}

/// Fresh model on oracle labels of `nodes`. Node order does not matter.
pub fn train_final(
    norm_adj: &SparseOperator,
    x: &FeatureMatrix,
    nodes: &[usize],
    labels: &[usize],
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<GcnParams> {
    if nodes.is_empty() {
        return Err(CegaError::Usage("no queried nodes to train on".into()));
    }
    if nodes.len() != labels.len() {
        return Err(CegaError::Usage("queried nodes and oracle labels differ in length".into()));
    }
    let mut pairs: Vec<(usize, usize)> = nodes.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_unstable();
    let (n, l): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
    train(norm_adj, x, &TrainingSet::new(n, l)?, num_classes, cfg, None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialSet {
    /// Drawn nodes, grouped by class in class order.
    pub nodes: Vec<usize>,
    /// Classes with fewer than `per_class` pool members.
    pub short_classes: Vec<usize>,
}

/// `per_class` uniform draws from each ground-truth class of the pool.
pub fn init_query_set(pool: &[usize], per_class: usize, labels: &LabelVector, seed: u64) -> Result<InitialSet> {
    if pool.is_empty() {
        return Err(CegaError::Usage("candidate pool is empty".into()));
    }
    let mut by_class = vec![Vec::new(); labels.num_classes()];
    for &v in pool {
        if v >= labels.num_nodes() {
            return Err(CegaError::Usage(format!("pool node {v} has no label")));
        }
        by_class[labels.get(v)].push(v);
    }
    let mut nodes = Vec::new();
    let mut short_classes = Vec::new();
    for (c, members) in by_class.iter_mut().enumerate() {
        members.sort_unstable();
        if members.len() < per_class {
            short_classes.push(c);
        }
        let k = per_class.min(members.len());
        nodes.extend(random_select(members, k, rng::derive_indexed(seed, "init", c as u64))?);
    }
    Ok(InitialSet { nodes, short_classes })
}

/// Dataset, split and frozen target, with the attacker's view of the pool
/// precomputed.
///
/// The pool subgraph numbers nodes by their position in the sorted pool,
/// so local order follows global order.
#[derive(Debug, Clone)]
pub struct Scenario {
    dataset: Dataset,
    partition: NodePartition,
    full_adj: SparseOperator,
    pool_graph: SparseGraph,
    pool_adj: SparseOperator,
    pool_x: FeatureMatrix,
    target: GcnParams,
    target_labels: Vec<usize>,
    pagerank_cfg: PageRankConfig,
    centrality: ScoreVector,
}

impl Scenario {
    pub fn new(dataset: Dataset, partition: NodePartition, target: GcnParams, pagerank_cfg: &PageRankConfig) -> Result<Self> {
        let n = dataset.num_nodes();
        for set in [&partition.candidate_pool, &partition.test, &partition.target_train] {
            if set.iter().any(|&v| v >= n) {
                return Err(CegaError::Structural("partition refers to nodes outside the dataset".into()));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CegaError::Structural("partition sets must be sorted and duplicate-free".into()));
            }
        }
        if partition.candidate_pool.is_empty() {
            return Err(CegaError::Usage("candidate pool is empty".into()));
        }
        target.validate()?;
        if target.input_dim() != dataset.features.dim() || target.num_classes() != dataset.num_classes() {
            return Err(CegaError::Structural("target shape does not match the dataset".into()));
        }
        let full_adj = normalized_adjacency(&dataset.graph);
        let target_labels = QueryOracle::new(&target, &full_adj, &dataset.features, None)?
            .target_labels()
            .to_vec();
        let pool_graph = dataset.graph.induced_subgraph(&partition.candidate_pool)?;
        let pool_adj = normalized_adjacency(&pool_graph);
        let pool_x = dataset.features.select_rows(&partition.candidate_pool);
        let centrality = pagerank(&pool_graph, pagerank_cfg)?;
        Ok(Scenario {
            dataset,
            partition,
            full_adj,
            pool_graph,
            pool_adj,
            pool_x,
            target,
            target_labels,
            pagerank_cfg: pagerank_cfg.clone(),
            centrality,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn partition(&self) -> &NodePartition {
        &self.partition
    }

    pub fn num_classes(&self) -> usize {
        self.dataset.num_classes()
    }

    /// Sorted global ids of the candidate pool.
    pub fn pool(&self) -> &[usize] {
        &self.partition.candidate_pool
    }

    pub fn pool_graph(&self) -> &SparseGraph {
        &self.pool_graph
    }

    pub fn pool_adjacency(&self) -> &SparseOperator {
        &self.pool_adj
    }

    pub fn pool_features(&self) -> &FeatureMatrix {
        &self.pool_x
    }

    pub fn full_adjacency(&self) -> &SparseOperator {
        &self.full_adj
    }

    pub fn target(&self) -> &GcnParams {
        &self.target
    }

    /// Target predictions on the full graph.
    pub fn target_labels(&self) -> &[usize] {
        &self.target_labels
    }

    /// PageRank over the pool subgraph, keyed by local id.
    pub fn centrality(&self) -> &ScoreVector {
        &self.centrality
    }

    pub fn oracle(&self, budget: Option<usize>) -> QueryOracle {
        QueryOracle::from_predictions(self.target_labels.clone(), budget)
    }

    /// Global id to local pool index.
    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.partition.candidate_pool.binary_search(&global).ok()
    }

    /// Score `model` on the test split of the full graph.
    pub fn evaluate(&self, model: &GcnParams) -> Result<EvalReport> {
        let cache = forward(model, &self.full_adj, &self.dataset.features)?;
        let predicted = crate::gcn::argmax_rows(&cache.softmax);
        evaluate_labels(
            &predicted,
            &self.target_labels,
            self.dataset.labels.labels(),
            &self.partition.test,
            self.num_classes(),
        )
    }

    /// Surrogate trained on the given queried nodes (global ids) over the pool.
    pub fn train_on(&self, nodes: &[usize], labels: &[usize], cfg: &TrainConfig) -> Result<GcnParams> {
        let local = nodes
            .iter()
            .map(|&v| {
                self.local_index(v)
                    .ok_or_else(|| CegaError::Usage(format!("node {v} is not in the candidate pool")))
            })
            .collect::<Result<Vec<_>>>()?;
        train_final(&self.pool_adj, &self.pool_x, &local, labels, self.num_classes(), cfg)
    }

    /// The full-subgraph reference: every pool node labelled by an
    /// unmetered oracle.
    pub fn train_reference(&self, cfg: &TrainConfig) -> Result<GcnParams> {
        let mut oracle = self.oracle(None);
        let labels = oracle.query(self.pool())?;
        self.train_on(self.pool(), &labels, cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    /// Global ids picked this cycle, in selection order.
    pub selected: Vec<usize>,
    /// `(ω₁, ω₂, ω₃)` for CEGA, `(α, β, γ)` for AGE, zeros for random.
    pub weights: [f64; 3],
    pub queried_after: usize,
    pub interim_eval: Option<EvalReport>,
}

#[derive(Debug, Clone)]
pub struct ExtractionRun {
    pub selector: Selector,
    pub total_budget: usize,
    pub initial: Vec<usize>,
    pub short_classes: Vec<usize>,
    pub initial_eval: Option<EvalReport>,
    pub records: Vec<CycleRecord>,
    /// Global ids in query order.
    pub queried: Vec<usize>,
    pub oracle_labels: Vec<usize>,
    pub queries_charged: usize,
    /// Every criterion weight was zero, so selection fell back to id order.
    pub degenerate: bool,
    pub interim: GcnParams,
}

impl ExtractionRun {
    /// Nodes and labels of the first `budget` queries.
    pub fn prefix(&self, budget: usize) -> (&[usize], &[usize]) {
        let b = budget.min(self.queried.len());
        (&self.queried[..b], &self.oracle_labels[..b])
    }

    /// `(queried count, report)` at every evaluated checkpoint.
    pub fn trajectory(&self) -> Vec<(usize, EvalReport)> {
        let first = self.initial_eval.map(|r| (self.initial.len(), r));
        first
            .into_iter()
            .chain(self.records.iter().filter_map(|r| r.interim_eval.map(|e| (r.queried_after, e))))
            .collect()
    }
}

fn embeddings(pred: &Prediction, source: EmbeddingSource) -> &Array2<f64> {
    match source {
        EmbeddingSource::Hidden => &pred.embeddings,
        EmbeddingSource::Softmax => &pred.softmax,
    }
}

fn rows(m: &Array2<f64>, ids: &[usize]) -> Array2<f64> {
    m.select(ndarray::Axis(0), ids)
}

fn uncertainty_direction(mode: UncertaintyMode) -> Direction {
    match mode {
        UncertaintyMode::Entropy => Direction::HigherBetter,
        // fewer label-preserving trials means less stable
        UncertaintyMode::Perturbation => Direction::LowerBetter,
    }
}

fn cycle_diversity_config(cfg: &ExtractionConfig, gamma: usize) -> crate::scoring::DiversityConfig {
    let mut dc = cfg.settings.diversity.clone();
    dc.kmeans_seed = rng::derive_indexed(cfg.seed, "kmeans", gamma as u64) ^ cfg.settings.diversity.kmeans_seed;
    dc
}

/// Centrality, uncertainty and diversity scores of `candidates` (local ids)
/// under `model`, as used in cycle `gamma`.
fn cega_scores(
    scenario: &Scenario,
    cfg: &ExtractionConfig,
    centrality: &ScoreVector,
    model: &GcnParams,
    candidates: &[usize],
    local_queried: &[usize],
    gamma: usize,
) -> Result<[ScoreVector; 3]> {
    let st = &cfg.settings;
    let (s_pool, x_pool) = (scenario.pool_adjacency(), scenario.pool_features());
    let pred = predict_embed(model, s_pool, x_pool)?;
    let l1 = centrality.subset(candidates)?;
    let l2 = match st.uncertainty {
        UncertaintyMode::Entropy => entropy_scores(&pred.softmax, candidates)?,
        UncertaintyMode::Perturbation => {
            let pc = PerturbationConfig {
                seed: rng::derive_indexed(cfg.seed, "perturb", gamma as u64) ^ st.perturb.seed,
                ..st.perturb.clone()
            };
            perturbation_scores(model, s_pool, x_pool, candidates, &pc)?
        }
    };
    let emb = embeddings(&pred, st.diversity.embedding);
    let dc = cycle_diversity_config(cfg, gamma);
    let fit = kmeans_fit(&rows(emb, local_queried), scenario.num_classes(), &dc)?;
    let l3 = diversity_scores(&rows(emb, candidates), candidates, &fit.centroids, &fit.assignments, dc.rho)?;
    Ok([l1, l2, l3])
}

/// Draw and query the initial set, then fit the first interim model on it.
fn initial_model(scenario: &Scenario, cfg: &ExtractionConfig, oracle: &mut QueryOracle) -> Result<(InitialSet, Vec<usize>, GcnParams)> {
    let st = &cfg.settings;
    let pool = scenario.pool();
    let init_seed = rng::derive_seed(cfg.seed, "init");
    let init = match st.init {
        InitMode::Stratified => init_query_set(pool, st.init_per_class, &scenario.dataset.labels, init_seed)?,
        InitMode::Random => InitialSet {
            nodes: random_select(pool, (st.init_per_class * scenario.num_classes()).min(pool.len()), init_seed)?,
            short_classes: Vec::new(),
        },
    };
    if init.nodes.len() > cfg.total_budget {
        return Err(CegaError::Config(format!(
            "initial set of {} nodes exceeds the budget {}",
            init.nodes.len(),
            cfg.total_budget
        )));
    }
    let labels = oracle.query(&init.nodes)?;
    let local: Vec<usize> = init.nodes.iter().map(|&v| scenario.local_index(v).expect("drawn from the pool")).collect();
    let f0_cfg = TrainConfig {
        epochs: match cfg.selector {
            Selector::Age => st.age.warmup_epochs,
            _ => st.train.epochs,
        },
        seed: rng::derive_seed(cfg.seed, "model") ^ st.train.seed,
        ..st.train.clone()
    };
    let set = TrainingSet::new(local, labels.clone())?;
    let model = train(
        scenario.pool_adjacency(),
        scenario.pool_features(),
        &set,
        scenario.num_classes(),
        &f0_cfg,
        None,
    )?;
    Ok((init, labels, model))
}

/// The three first-cycle CEGA score vectors, keyed by global node id.
pub fn first_cycle_scores(scenario: &Scenario, cfg: &ExtractionConfig) -> Result<[ScoreVector; 3]> {
    let mut one = cfg.clone();
    one.selector = Selector::Cega;
    one.total_budget = scenario.pool().len();
    one.settings.evaluate_interim = false;
    let mut oracle = scenario.oracle(Some(one.total_budget));
    let (init, labels, model) = initial_model(scenario, &one, &mut oracle)?;
    let local: Vec<usize> = init.nodes.iter().map(|&v| scenario.local_index(v).expect("pool node")).collect();
    let candidates: Vec<usize> = (0..scenario.pool().len()).filter(|l| !local.contains(l)).collect();
    debug_assert_eq!(labels.len(), local.len());
    let scores = cega_scores(scenario, &one, scenario.centrality(), &model, &candidates, &local, 1)?;
    let to_global = |sv: ScoreVector| {
        let ids = sv.node_ids().iter().map(|&l| scenario.pool()[l]).collect();
        ScoreVector::new(ids, sv.values().to_vec())
    };
    let [a, b, c] = scores;
    Ok([to_global(a)?, to_global(b)?, to_global(c)?])
}

/// Run the query loop: initial set, then one selection, query and
/// warm-start update per cycle until the budget is spent.
pub fn run_extraction(scenario: &Scenario, cfg: &ExtractionConfig) -> Result<ExtractionRun> {
    let st = &cfg.settings;
    st.validate()?;
    let c = scenario.num_classes();
    let pool = scenario.pool();
    let b = cfg.total_budget;
    if b > pool.len() {
        return Err(CegaError::Config(format!("budget {b} exceeds the pool of {}", pool.len())));
    }

    let mut oracle = scenario.oracle(Some(b));
    let (init, mut oracle_labels, mut model) = initial_model(scenario, cfg, &mut oracle)?;
    let i0 = init.nodes.len();
    let mut queried = init.nodes.clone();
    let mut is_queried = vec![false; pool.len()];
    let mut local_queried = Vec::with_capacity(b);
    for &v in &queried {
        let l = scenario.local_index(v).expect("drawn from the pool");
        is_queried[l] = true;
        local_queried.push(l);
    }
    let interim_cfg = TrainConfig {
        epochs: st.interim_epochs,
        ..st.train.clone()
    };
    let (s_pool, x_pool) = (scenario.pool_adjacency(), scenario.pool_features());
    let training_set = |local: &[usize], labels: &[usize]| TrainingSet::new(local.to_vec(), labels.to_vec());
    let initial_eval = if st.evaluate_interim && i0 % c == 0 {
        Some(scenario.evaluate(&model)?)
    } else {
        None
    };

    let centrality = if st.pagerank == scenario.pagerank_cfg {
        scenario.centrality.clone()
    } else {
        pagerank(scenario.pool_graph(), &st.pagerank)?
    };
    let zeroed: Vec<usize> = st.ablate.iter().map(|a| a.index()).collect();
    let degenerate = cfg.selector == Selector::Cega && Criterion::ALL.iter().all(|a| st.ablate.contains(a));

    let kappa = st.per_cycle;
    let cycles = (b - i0).div_ceil(kappa);
    let mut records = Vec::with_capacity(cycles);
    for gamma in 1..=cycles {
        let mut selected = Vec::new();
        let mut weights = [0.0; 3];
        if i0 + (gamma - 1) * kappa < b {
            let k = kappa.min(b - queried.len());
            let candidates: Vec<usize> = (0..pool.len()).filter(|&l| !is_queried[l]).collect();
            let picked_local = match cfg.selector {
                Selector::Random => random_select(&candidates, k, rng::derive_indexed(cfg.seed, "selector", gamma as u64))?,
                Selector::Cega => {
                    let [l1, l2, l3] = cega_scores(scenario, cfg, &centrality, &model, &candidates, &local_queried, gamma)?;
                    let dir2 = uncertainty_direction(st.uncertainty);
                    let table = RankTable::from_scores([
                        (&l1, Direction::HigherBetter),
                        (&l2, dir2),
                        (&l3, Direction::HigherBetter),
                    ])?;
                    let w = adaptive_weights(gamma, &st.weights)?.without(&zeroed);
                    weights = w.0;
                    select_top_k(&table, &w, k)?
                }
                Selector::Age => {
                    let pred = predict_embed(&model, s_pool, x_pool)?;
                    let ent = entropy_scores(&pred.softmax, &candidates)?;
                    let dc = cycle_diversity_config(cfg, gamma);
                    let emb = embeddings(&pred, st.diversity.embedding);
                    let dens = age_density(&rows(emb, &candidates), &candidates, c, &dc)?;
                    let cent = centrality.subset(&candidates)?;
                    let u: f64 = rng::rng_from(rng::derive_indexed(cfg.seed, "selector", gamma as u64)).random();
                    let g = sample_beta_one(age_gamma_shape(gamma), u);
                    weights = [(1.0 - g) / 2.0, (1.0 - g) / 2.0, g];
                    age_select_with_gamma(&ent, &dens, &cent, g, k)?
                }
            };
            selected = picked_local.iter().map(|&l| pool[l]).collect();
            let answers = oracle.query(&selected)?;
            for (&l, (&v, a)) in picked_local.iter().zip(selected.iter().zip(answers)) {
                is_queried[l] = true;
                local_queried.push(l);
                queried.push(v);
                oracle_labels.push(a);
            }
        }
        model = train(
            s_pool,
            x_pool,
            &training_set(&local_queried, &oracle_labels)?,
            c,
            &interim_cfg,
            Some(&model),
        )?;
        let interim_eval = if st.evaluate_interim && !selected.is_empty() && queried.len() % c == 0 {
            Some(scenario.evaluate(&model)?)
        } else {
            None
        };
        records.push(CycleRecord {
            cycle: gamma,
            selected,
            weights,
            queried_after: queried.len(),
            interim_eval,
        });
    }

    Ok(ExtractionRun {
        selector: cfg.selector,
        total_budget: b,
        initial: init.nodes,
        short_classes: init.short_classes,
        initial_eval,
        records,
        queried,
        oracle_labels,
        queries_charged: oracle.queries_charged(),
        degenerate,
        interim: model,
    })
}

/// CEGA with one criterion's weight forced to zero, scored after final training.
pub fn run_ablation(scenario: &Scenario, cfg: &ExtractionConfig, ablate: Criterion, final_cfg: &TrainConfig) -> Result<EvalReport> {
    if cfg.selector != Selector::Cega {
        return Err(CegaError::Usage("ablation applies to the cega selector only".into()));
    }
    let mut cfg = cfg.clone();
    cfg.settings.ablate = vec![ablate];
    let run = run_extraction(scenario, &cfg)?;
    let model = scenario.train_on(&run.queried, &run.oracle_labels, final_cfg)?;
    scenario.evaluate(&model)
}

/// Check budget accounting and strict nesting of the queried sets.
pub fn audit_run(run: &ExtractionRun, per_cycle: usize) -> Result<()> {
    let b = run.total_budget;
    let fail = |msg: String| Err(CegaError::Structural(format!("audit: {msg}")));
    let mut distinct = run.queried.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != run.queried.len() {
        return fail("a node was queried twice".into());
    }
    if run.queries_charged > b || run.queried.len() > b {
        return fail(format!("{} queries charged against a budget of {b}", run.queries_charged));
    }
    if run.queries_charged != run.queried.len() || run.oracle_labels.len() != run.queried.len() {
        return fail("charged queries and recorded labels disagree".into());
    }
    if run.queried.get(..run.initial.len()) != Some(&run.initial[..]) {
        return fail("queried list does not start with the initial set".into());
    }
    let mut size = run.initial.len();
    for r in &run.records {
        if r.selected.len() > per_cycle {
            return fail(format!("cycle {} selected {} nodes", r.cycle, r.selected.len()));
        }
        if size < b && r.selected.is_empty() {
            return fail(format!("cycle {} added nothing with budget left", r.cycle));
        }
        if run.queried.get(size..size + r.selected.len()) != Some(&r.selected[..]) {
            return fail(format!("cycle {} selection does not extend the queried set", r.cycle));
        }
        size += r.selected.len();
        if r.queried_after != size {
            return fail(format!("cycle {} reports {} queried, expected {size}", r.cycle, r.queried_after));
        }
    }
    let expected = b.min(run.initial.len() + run.records.len() * per_cycle);
    if size != run.queried.len() || size != expected {
        return fail(format!("final queried count {size}, expected {expected}"));
    }
    Ok(())
}
