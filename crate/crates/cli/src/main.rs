use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(name = "cega", version, about = "Budget-constrained extraction experiments on GCN node classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment spec (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Worker threads for independent runs.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Override the spec's root seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Override the spec's output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the spec's dataset in the line-oriented directory format.
    GenData(Common),
    /// Run every selector × seed replica and score each budget.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also train the full-subgraph reference and write reference.csv.
        #[arg(long)]
        with_reference: bool,
    },
    /// Performance gap between the full-subgraph reference and the largest budget.
    SweepGap {
        #[command(flatten)]
        common: Common,
        /// Train the reference now instead of reading reference.csv.
        #[arg(long)]
        with_reference: bool,
    },
    /// Full CEGA against each single-criterion ablation at the largest budget.
    Ablate(Common),
    /// Summarize an output directory's results.csv.
    Report {
        /// Directory holding results.csv.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Spec to check against the results and to dump first-cycle scores from.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "INT")]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenData(c) => commands::gen_data(&c),
        Command::Run { common, with_reference } => commands::run(&common, with_reference),
        Command::SweepGap { common, with_reference } => commands::sweep_gap(&common, with_reference),
        Command::Ablate(c) => commands::ablate(&c),
        Command::Report { out, config, seed } => commands::report(&out, config.as_deref(), seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
