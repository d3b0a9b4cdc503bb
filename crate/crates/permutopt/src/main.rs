use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use permutopt::commands::{cli_coverage, cli_icc, cli_plot, cli_run};
use permutopt_core::analysis::IccVariant;

#[derive(Parser)]
#[command(
    name = "permutopt",
    about = "Reproducible experiments for permutation-randomized optimizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every (optimizer x seed) run of an experiment config.
    Run {
        config: PathBuf,
        /// Worker cap for the run matrix (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (default: the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one JSON line per iteration next to each run.json.
        #[arg(long)]
        jsonl: bool,
    },
    /// Run a low-dimensional experiment and measure domain coverage.
    Coverage {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Intra-class correlation over the run records in a directory.
    Icc {
        dir: PathBuf,
        /// ICC model: 1 for one-way random, 2 for two-way random.
        #[arg(long, default_value = "2")]
        variant: String,
        /// How many trailing losses per run feed the table.
        #[arg(long, default_value_t = 10)]
        final_k: usize,
    },
    /// Overlay the loss curves of run records in one SVG.
    Plot {
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "plot.svg")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            workers,
            out,
            jsonl,
        } => cli_run(&config, workers, out.as_deref(), jsonl).map(|report| report.failures == 0),
        Command::Coverage {
            config,
            workers,
            out,
        } => cli_coverage(&config, workers, out.as_deref()).map(|report| report.failures == 0),
        Command::Icc {
            dir,
            variant,
            final_k,
        } => {
            let variant = match variant.as_str() {
                "1" => IccVariant::OneWay,
                "2" => IccVariant::TwoWay,
                other => {
                    eprintln!("error: --variant must be 1 or 2, got '{other}'");
                    return ExitCode::from(2);
                }
            };
            cli_icc(&dir, variant, final_k).map(|_| true)
        }
        Command::Plot { runs, out } => cli_plot(&runs, &out).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one run aborted");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
