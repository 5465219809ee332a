//! `uqtriage`: score the confidence of LLM-generated labels, evaluate
//! confidence strategies, and pick the least-confident items for human
//! review.
//!
//! Exit codes: 0 = success, 1 = finished with per-item failures,
//! 2 = configuration or usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uq_core::model::Strategy;
use uq_toolkit::commands::{
    cmd_annotate, cmd_evaluate, cmd_score, cmd_triage, AnnotateArgs, EvaluateArgs, ScoreArgs,
    TriageArgs,
};
use uq_toolkit::config::AppConfig;
use uq_toolkit::ingestion::DatasetFormat;

#[derive(Parser)]
#[command(name = "uqtriage", version, about)]
struct Cli {
    /// Configuration file (TOML). Flags override UQTRIAGE_* environment
    /// variables, which override the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured mode (live, record, replay).
    #[arg(long, global = true)]
    mode: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a dataset with the configured models.
    Annotate(AnnotateCli),
    /// Score annotations under one or more confidence strategies.
    Score(ScoreCli),
    /// Build recall curves, AUC and accuracy tables from scored items.
    Evaluate(EvaluateCli),
    /// Select the least-confident items for human review.
    Triage(TriageCli),
}

#[derive(Args)]
struct AnnotateCli {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "generic_csv")]
    format: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ScoreCli {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    /// Attach gold labels from this dataset while scoring.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value = "generic_csv")]
    format: String,
    /// Comma-separated strategies; default is all five.
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    /// Restrict single-model strategies to one model.
    #[arg(long)]
    model: Option<String>,
    /// Score missing self-reports as 0 instead of failing.
    #[arg(long)]
    lenient_self_report: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateCli {
    #[arg(long)]
    scored: PathBuf,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value = "generic_csv")]
    format: String,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    output_dir: PathBuf,
    /// Evaluated fraction reported per strategy.
    #[arg(long, default_value_t = 0.2)]
    recall_fraction: f64,
    /// Dataset column label in the summary table.
    #[arg(long)]
    dataset_name: Option<String>,
}

#[derive(Args)]
struct TriageCli {
    #[arg(long)]
    scored: PathBuf,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    fraction: f64,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value = "generic_csv")]
    format: String,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

fn parse_strategies(names: &[String]) -> Result<Vec<Strategy>, String> {
    if names.is_empty() {
        return Ok(Strategy::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse::<Strategy>().map_err(|_| format!("unknown strategy {n:?}")))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    let mut config = AppConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(mode) = &cli.mode {
        config.endpoint.mode = mode.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    }
    let outcome = match cli.command {
        Command::Annotate(args) => {
            let format: DatasetFormat =
                args.format.parse().map_err(|e: String| anyhow::anyhow!(e))?;
            cmd_annotate(
                &config,
                &AnnotateArgs {
                    schema: args.schema,
                    dataset: args.dataset,
                    format,
                    output: args.output,
                },
            )?
        }
        Command::Score(args) => {
            let format: DatasetFormat =
                args.format.parse().map_err(|e: String| anyhow::anyhow!(e))?;
            let strategies =
                parse_strategies(&args.strategies).map_err(|e| anyhow::anyhow!(e))?;
            cmd_score(
                &config,
                &ScoreArgs {
                    schema: args.schema,
                    annotations: args.annotations,
                    dataset: args.dataset.map(|d| (d, format)),
                    strategies,
                    model: args.model,
                    lenient_self_report: args.lenient_self_report,
                    output: args.output,
                },
            )?
        }
        Command::Evaluate(args) => {
            let format: DatasetFormat =
                args.format.parse().map_err(|e: String| anyhow::anyhow!(e))?;
            cmd_evaluate(
                &config,
                &EvaluateArgs {
                    scored: args.scored,
                    dataset: args.dataset.map(|d| (d, format)),
                    schema: args.schema,
                    output_dir: args.output_dir,
                    recall_fraction: args.recall_fraction,
                    dataset_name: args.dataset_name,
                },
            )?
        }
        Command::Triage(args) => {
            let format: DatasetFormat =
                args.format.parse().map_err(|e: String| anyhow::anyhow!(e))?;
            let strategy = match &args.strategy {
                None => None,
                Some(s) => Some(
                    s.parse::<Strategy>()
                        .map_err(|_| anyhow::anyhow!("unknown strategy {s:?}"))?,
                ),
            };
            cmd_triage(
                &config,
                &TriageArgs {
                    scored: args.scored,
                    strategy,
                    model: args.model,
                    fraction: args.fraction,
                    dataset: args.dataset.map(|d| (d, format)),
                    schema: args.schema,
                    output: args.output,
                },
            )?
        }
    };
    Ok(outcome.failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
