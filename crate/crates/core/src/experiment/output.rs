use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::runner::{AblationRow, Failure, GapRow, LogRow, ResultRow, TrajectoryRow, ABLATION_VARIANTS};
use super::ExperimentSpec;
use crate::error::{CegaError, Result};
use crate::extraction::{EvalReport, Selector};
use crate::graph::io::write_atomic;

pub const RESULTS_HEADER: &str = "selector,budget,seed,accuracy,fidelity,macro_f1";
pub const TRAJECTORY_HEADER: &str = "selector,seed,budget_checkpoint,accuracy,fidelity,macro_f1";
pub const LOG_HEADER: &str = "cycle,selected_ids,w1,w2,w3,selector";
pub const GAP_HEADER: &str = "selector,budget,seed,accuracy_gap,fidelity_gap,macro_f1_gap";
pub const ABLATION_HEADER: &str = "variant,seed,accuracy,fidelity,macro_f1";
pub const ABLATION_SUMMARY_HEADER: &str = "variant,metric,mean,std";
pub const SUMMARY_HEADER: &str =
    "selector,budget,n,accuracy_mean,accuracy_std,fidelity_mean,fidelity_std,macro_f1_mean,macro_f1_std";

fn num(v: f64) -> String {
    format!("{v:.9}")
}

/// Comment lines identifying the spec that produced a file.
pub fn provenance_header(spec: &ExperimentSpec) -> String {
    let mut h = format!(
        "# config_sha256={}\n# config={}\n# metric_f1=macro\n",
        spec.digest(),
        spec.canonical_json()
    );
    if spec.selectors.contains(&Selector::Age) {
        h.push_str("# note=age density is 1/(1+distance to nearest k-means centre of candidate embeddings)\n");
    }
    h
}

fn report_cells(r: &EvalReport) -> String {
    format!("{},{},{}", num(r.accuracy), num(r.fidelity), num(r.macro_f1))
}

pub fn results_csv(spec: &ExperimentSpec, rows: &[ResultRow], extra_header: &str) -> String {
    let mut s = provenance_header(spec);
    s.push_str(extra_header);
    s.push_str(RESULTS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.selector, r.budget, r.seed, report_cells(&r.report));
    }
    s
}

pub fn trajectory_csv(spec: &ExperimentSpec, rows: &[TrajectoryRow]) -> String {
    let mut s = provenance_header(spec);
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.selector, r.seed, r.checkpoint, report_cells(&r.report));
    }
    s
}

/// Selection log; node ids within a cycle are separated by `;`.
pub fn selection_log_csv(rows: &[LogRow]) -> String {
    let mut s = format!("{LOG_HEADER}\n");
    for r in rows {
        let ids: Vec<String> = r.selected.iter().map(|v| v.to_string()).collect();
        let [w1, w2, w3] = r.weights;
        let _ = writeln!(s, "{},{},{},{},{},{}", r.cycle, ids.join(";"), num(w1), num(w2), num(w3), r.selector);
    }
    s
}

pub fn gap_csv(spec: &ExperimentSpec, rows: &[GapRow]) -> String {
    let mut s = provenance_header(spec);
    s.push_str(GAP_HEADER);
    s.push('\n');
    for r in rows {
        let g = &r.gap;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.selector,
            r.budget,
            r.seed,
            num(g.accuracy),
            num(g.fidelity),
            num(g.macro_f1)
        );
    }
    s
}

pub fn ablation_csv(spec: &ExperimentSpec, rows: &[AblationRow]) -> String {
    let mut s = provenance_header(spec);
    s.push_str(ABLATION_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.variant, r.seed, report_cells(&r.report));
    }
    s
}

/// Sample mean and standard deviation (`n − 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Mean ± std of each metric for one group of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCell {
    pub selector: String,
    pub budget: usize,
    pub n: usize,
    pub accuracy: (f64, f64),
    pub fidelity: (f64, f64),
    pub macro_f1: (f64, f64),
}

/// Group by selector and budget, keeping first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryCell> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let k = (r.selector.clone(), r.budget);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(selector, budget)| {
            let group: Vec<&EvalReport> = rows
                .iter()
                .filter(|r| r.selector == selector && r.budget == budget)
                .map(|r| &r.report)
                .collect();
            let col = |f: fn(&EvalReport) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryCell {
                n: group.len(),
                accuracy: col(|r| r.accuracy),
                fidelity: col(|r| r.fidelity),
                macro_f1: col(|r| r.macro_f1),
                selector,
                budget,
            }
        })
        .collect()
}

pub fn summary_csv(cells: &[SummaryCell]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            c.selector,
            c.budget,
            c.n,
            num(c.accuracy.0),
            num(c.accuracy.1),
            num(c.fidelity.0),
            num(c.fidelity.1),
            num(c.macro_f1.0),
            num(c.macro_f1.1)
        );
    }
    s
}

/// Plain-text table of percentages, one row per selector and budget.
pub fn summary_table(cells: &[SummaryCell]) -> String {
    let pm = |(m, s): (f64, f64)| format!("{:6.2} ± {:5.2}", 100.0 * m, 100.0 * s);
    let mut t = format!(
        "{:<10} {:>6} {:>3}  {:>15}  {:>15}  {:>15}\n",
        "selector", "budget", "n", "accuracy", "fidelity", "macro-F1"
    );
    for c in cells {
        let _ = writeln!(
            t,
            "{:<10} {:>6} {:>3}  {:>15}  {:>15}  {:>15}",
            c.selector,
            c.budget,
            c.n,
            pm(c.accuracy),
            pm(c.fidelity),
            pm(c.macro_f1)
        );
    }
    t
}

/// Mean ± std per variant and metric: four variants, three metrics.
pub fn ablation_summary(rows: &[AblationRow]) -> Vec<(&'static str, &'static str, f64, f64)> {
    let metrics: [(&str, fn(&EvalReport) -> f64); 3] = [
        ("accuracy", |r| r.accuracy),
        ("fidelity", |r| r.fidelity),
        ("macro_f1", |r| r.macro_f1),
    ];
    let mut out = Vec::new();
    for (variant, _) in ABLATION_VARIANTS {
        for (metric, f) in metrics {
            let v: Vec<f64> = rows.iter().filter(|r| r.variant == variant).map(|r| f(&r.report)).collect();
            let (m, s) = mean_std(&v);
            out.push((variant, metric, m, s));
        }
    }
    out
}

/// Whether dropping diversity leaves runs at least as spread out as the
/// full method on at least half the metrics.
pub fn no_diversity_less_stable(summary: &[(&str, &str, f64, f64)]) -> bool {
    let std_of = |variant: &str, metric: &str| {
        summary
            .iter()
            .find(|r| r.0 == variant && r.1 == metric)
            .map(|r| r.3)
            .unwrap_or(f64::NAN)
    };
    let metrics = ["accuracy", "fidelity", "macro_f1"];
    let hits = metrics
        .iter()
        .filter(|m| std_of("no_diversity", m) >= std_of("full", m))
        .count();
    2 * hits >= metrics.len()
}

pub fn ablation_summary_csv(spec: &ExperimentSpec, summary: &[(&str, &str, f64, f64)]) -> String {
    let mut s = provenance_header(spec);
    let _ = writeln!(s, "# no_diversity_less_stable={}", no_diversity_less_stable(summary));
    s.push_str(ABLATION_SUMMARY_HEADER);
    s.push('\n');
    for (variant, metric, m, sd) in summary {
        let _ = writeln!(s, "{variant},{metric},{},{}", num(*m), num(*sd));
    }
    s
}

pub fn failures_text(failures: &[Failure]) -> String {
    let mut s = String::new();
    for f in failures {
        let _ = writeln!(s, "{}: {}", f.task, f.error);
    }
    s
}

/// Create `dir` and write `name` inside it atomically.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CegaError::io(dir, e))?;
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CegaError::io(parent, e))?;
    }
    write_atomic(&path, contents)?;
    Ok(path)
}

/// A parsed results file with the digest from its header, if present.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsFile {
    pub digest: Option<String>,
    pub config: Option<String>,
    pub rows: Vec<ResultRow>,
}

pub fn parse_results(path: &Path, text: &str) -> Result<ResultsFile> {
    let mut digest = None;
    let mut config = None;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim_start();
            if let Some(d) = comment.strip_prefix("config_sha256=") {
                digest = Some(d.to_string());
            } else if let Some(c) = comment.strip_prefix("config=") {
                config = Some(c.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != RESULTS_HEADER {
                return Err(CegaError::load(path, lineno, format!("expected header `{RESULTS_HEADER}`")));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(CegaError::load(path, lineno, format!("expected 6 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| CegaError::load(path, lineno, format!("`{s}`: {e}")));
        let frac = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|e| CegaError::load(path, lineno, format!("`{s}`: {e}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(CegaError::load(path, lineno, format!("{v} is not a fraction")));
            }
            Ok(v)
        };
        rows.push(ResultRow {
            selector: f[0].to_string(),
            budget: int(f[1])? as usize,
            seed: int(f[2])?,
            report: EvalReport {
                accuracy: frac(f[3])?,
                fidelity: frac(f[4])?,
                macro_f1: frac(f[5])?,
                num_test: 0,
            },
        });
    }
    if !seen_header {
        return Err(CegaError::load(path, 0, "no header line"));
    }
    Ok(ResultsFile { digest, config, rows })
}

pub fn read_results(path: &Path) -> Result<ResultsFile> {
    let text = fs::read_to_string(path).map_err(|e| CegaError::io(path, e))?;
    parse_results(path, &text)
}
