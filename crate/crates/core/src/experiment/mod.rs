//! Experiment specs, the replica grid, and the CSV files it writes.

mod output;
mod runner;
mod spec;

pub use output::{
    ablation_csv, ablation_summary, ablation_summary_csv, failures_text, gap_csv, mean_std, no_diversity_less_stable,
    parse_results, provenance_header, read_results, results_csv, selection_log_csv, summarize, summary_csv,
    summary_table, trajectory_csv, write_output, ResultsFile, SummaryCell, ABLATION_HEADER, ABLATION_SUMMARY_HEADER,
    GAP_HEADER, LOG_HEADER, RESULTS_HEADER, SUMMARY_HEADER, TRAJECTORY_HEADER,
};
pub use runner::{
    gaps, run_ablations, run_grid, run_references, spec_dataset, AblationRow, Experiment, Failure, GapRow,
    GridOutcome, LogRow, ReplicaOutcome, ResultRow, TrajectoryRow, ABLATION_VARIANTS,
};
pub use spec::{DatasetSource, ExperimentSpec};
