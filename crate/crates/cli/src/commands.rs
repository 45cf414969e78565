use std::path::{Path, PathBuf};

use cega::experiment::{
    ablation_csv, ablation_summary, ablation_summary_csv, failures_text, gap_csv, gaps, mean_std,
    no_diversity_less_stable, read_results, results_csv, run_ablations, run_grid, run_references, selection_log_csv,
    spec_dataset, summarize, summary_csv, summary_table, trajectory_csv, write_output, Experiment, ExperimentSpec,
    Failure, ResultRow,
};
use cega::extraction::{first_cycle_scores, Criterion, Selector};
use cega::graph::save_dataset;
use cega::CegaError;

use crate::Common;

pub struct Exit {
    pub code: u8,
    pub message: String,
}

const VALIDATION: u8 = 1;
const RUN_FAILURE: u8 = 2;

impl From<CegaError> for Exit {
    fn from(e: CegaError) -> Self {
        let code = match e {
            CegaError::Config(_) | CegaError::Usage(_) | CegaError::Load { .. } | CegaError::Structural(_) => VALIDATION,
            _ => RUN_FAILURE,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Exit>;

fn validation(message: String) -> Exit {
    Exit {
        code: VALIDATION,
        message,
    }
}

fn load_spec(c: &Common) -> Result<ExperimentSpec, Exit> {
    let mut spec = ExperimentSpec::load(&c.config).map_err(|e| validation(e.to_string()))?;
    if let Some(seed) = c.seed {
        spec.seed = seed;
    }
    if let Some(out) = &c.out {
        spec.output_dir = out.clone();
    }
    if c.jobs == Some(0) {
        return Err(validation("--jobs must be at least 1".into()));
    }
    Ok(spec)
}

fn jobs(c: &Common) -> usize {
    c.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn prepare(spec: ExperimentSpec) -> Result<Experiment, Exit> {
    let exp = Experiment::prepare(spec)?;
    for c in exp.short_classes() {
        eprintln!("warning: class {c} has too few pool nodes for the initial draw; the initial set is smaller");
    }
    Ok(exp)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Exit> {
    Ok(write_output(dir, name, contents)?)
}

/// Write the failure manifest and turn failures into exit code 2.
fn finish(dir: &Path, failures: &[Failure]) -> Outcome {
    if failures.is_empty() {
        return Ok(());
    }
    let path = write(dir, "failures.txt", &failures_text(failures))?;
    Err(Exit {
        code: RUN_FAILURE,
        message: format!("{} run(s) failed; see {}", failures.len(), path.display()),
    })
}

pub fn gen_data(c: &Common) -> Outcome {
    let spec = load_spec(c)?;
    let ds = spec_dataset(&spec)?;
    let dir = c.out.clone().unwrap_or_else(|| spec.output_dir.join("data"));
    save_dataset(&dir, &ds)?;
    println!(
        "wrote {} nodes, {} edges, {} classes to {}",
        ds.num_nodes(),
        ds.graph.edges().len(),
        ds.num_classes(),
        dir.display()
    );
    Ok(())
}

pub fn run(c: &Common, with_reference: bool) -> Outcome {
    let spec = load_spec(c)?;
    let exp = prepare(spec)?;
    let spec = exp.spec();
    let dir = spec.output_dir.clone();
    write(&dir, "config.json", &spec.to_json_pretty())?;

    let grid = run_grid(&exp, jobs(c))?;
    let mut failures = grid.failures.clone();
    write(&dir, "results.csv", &results_csv(spec, &grid.results, ""))?;
    write(&dir, "trajectory.csv", &trajectory_csv(spec, &grid.trajectory))?;
    for (s, seed, log) in &grid.logs {
        write(&dir, &format!("selection_log/{s}_seed{seed}.csv"), &selection_log_csv(log))?;
    }
    let cells = summarize(&grid.results);
    write(&dir, "summary.csv", &summary_csv(&cells))?;
    print!("{}", summary_table(&cells));

    if with_reference {
        let (rows, f) = run_references(&exp, jobs(c))?;
        failures.extend(f);
        write(&dir, "reference.csv", &results_csv(spec, &rows, "# reference=true\n"))?;
    }
    finish(&dir, &failures)
}

fn reference_rows(exp: &Experiment, dir: &Path, with_reference: bool, jobs: usize) -> Result<(Vec<ResultRow>, Vec<Failure>), Exit> {
    let spec = exp.spec();
    let path = dir.join("reference.csv");
    if with_reference {
        let (rows, failures) = run_references(exp, jobs)?;
        write(dir, "reference.csv", &results_csv(spec, &rows, "# reference=true\n"))?;
        return Ok((rows, failures));
    }
    if !path.exists() {
        return Err(validation(format!(
            "no reference run at {}; run `cega run --with-reference` first or pass --with-reference",
            path.display()
        )));
    }
    let file = read_results(&path)?;
    if file.digest.as_deref() != Some(spec.digest().as_str()) {
        return Err(validation(format!(
            "{} was produced by a different config; rerun it or pass --with-reference",
            path.display()
        )));
    }
    Ok((file.rows, Vec::new()))
}

pub fn sweep_gap(c: &Common, with_reference: bool) -> Outcome {
    let spec = load_spec(c)?;
    let exp = prepare(spec)?;
    let dir = exp.spec().output_dir.clone();
    let (reference, mut failures) = reference_rows(&exp, &dir, with_reference, jobs(c))?;

    // Only the largest budget matters here; the query runs are the same.
    let max_exp = exp.with_budgets(vec![exp.spec().max_budget()])?;
    let grid = run_grid(&max_exp, jobs(c))?;
    failures.extend(grid.failures);

    let rows = gaps(&exp, &grid.results, &reference)?;
    let spec = exp.spec();
    write(&dir, "gap.csv", &gap_csv(spec, &rows))?;
    println!("{:<10} {:>6}  {:>15}  {:>15}  {:>15}", "selector", "budget", "Δaccuracy", "Δfidelity", "Δmacro-F1");
    for &s in &spec.selectors {
        let of = |f: fn(&cega::extraction::PerformanceGap) -> f64| {
            let v: Vec<f64> = rows.iter().filter(|r| r.selector == s).map(|r| f(&r.gap)).collect();
            let (m, sd) = mean_std(&v);
            format!("{:6.2} ± {:5.2}", 100.0 * m, 100.0 * sd)
        };
        println!(
            "{:<10} {:>6}  {:>15}  {:>15}  {:>15}",
            s,
            spec.max_budget(),
            of(|g| g.accuracy),
            of(|g| g.fidelity),
            of(|g| g.macro_f1)
        );
    }
    finish(&dir, &failures)
}

pub fn ablate(c: &Common) -> Outcome {
    let spec = load_spec(c)?;
    if !spec.selectors.contains(&Selector::Cega) {
        return Err(validation("field `selectors`: ablation needs the cega selector".into()));
    }
    let exp = prepare(spec)?;
    let dir = exp.spec().output_dir.clone();
    let (rows, failures) = run_ablations(&exp, jobs(c))?;
    let summary = ablation_summary(&rows);
    write(&dir, "ablation.csv", &ablation_csv(exp.spec(), &rows))?;
    write(&dir, "ablation_summary.csv", &ablation_summary_csv(exp.spec(), &summary))?;
    println!("{:<15} {:<9} {:>15}", "variant", "metric", "mean ± std");
    for (variant, metric, m, s) in &summary {
        println!("{variant:<15} {metric:<9} {:>6.2} ± {:5.2}", 100.0 * m, 100.0 * s);
    }
    println!("no_diversity_less_stable={}", no_diversity_less_stable(&summary));
    finish(&dir, &failures)
}

pub fn report(out: &Path, config: Option<&Path>, seed: Option<u64>) -> Outcome {
    let file = read_results(&out.join("results.csv"))?;
    let cells = summarize(&file.rows);
    write(out, "summary.csv", &summary_csv(&cells))?;
    print!("{}", summary_table(&cells));

    let Some(config) = config else {
        return Ok(());
    };
    let mut spec = ExperimentSpec::load(config).map_err(|e| validation(e.to_string()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if file.digest.as_deref() != Some(spec.digest().as_str()) {
        eprintln!("warning: results.csv was produced by a different config");
    }
    let exp = prepare(spec)?;
    let replica = exp.spec().seeds[0];
    let cfg = exp.extraction_config(Selector::Cega, exp.spec().max_budget(), replica);
    let scores = first_cycle_scores(exp.scenario(), &cfg)?;
    for (criterion, sv) in Criterion::ALL.iter().zip(&scores) {
        let path = write(out, &format!("scores/{}_seed{replica}.csv", criterion.name()), &sv.to_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
