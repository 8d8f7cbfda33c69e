use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orderlearn::datasets::io::write_dir;
use orderlearn::datasets::{generate_synthetic, load_dir, DatasetError, SyntheticConfig};
use orderlearn::experiment::{run_experiment, write_outputs, ExperimentConfig, ExperimentError, Metric};
use orderlearn::order::check::check_cases;
use orderlearn::order::Pruning;
use orderlearn::rng::seeded;
use orderlearn::strategies::{Strategy, StrategyKind, UnknownStrategy};
use orderlearn_server::{serve, ServeConfig, ServiceError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "orderlearn", version, about = "Active learning of strict partial orders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic layered-DAG pool.
    Gen {
        #[arg(long, default_value_t = 60)]
        nodes: usize,
        #[arg(long, default_value_t = 5)]
        layers: usize,
        #[arg(long, default_value_t = 0.15)]
        edge_prob: f64,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Subsample the pool to at most this many pairs.
        #[arg(long)]
        max_pairs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run repeated simulated trials and write traces and aggregates.
    Run {
        /// JSON experiment config; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One of random, lc, qbc, cnt, lc-r+, qbc-r+.
        #[arg(long)]
        strategy: Option<String>,
        /// Label only the answered pairs (the plain variant of a strategy).
        #[arg(long)]
        no_reasoning: bool,
        #[arg(long)]
        candidate_cap: Option<usize>,
        #[arg(long)]
        retrain_every: Option<usize>,
        #[arg(long)]
        eval_every: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        n_trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Draw half the seed labels from each class.
        #[arg(long)]
        balanced_seeds: bool,
    },
    /// Print the query-count bounds of a dataset's order.
    Bounds {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Compare incremental closures with the fixpoint on random label sets.
    ClosureCheck {
        #[arg(long, default_value_t = 1000)]
        n_cases: usize,
        #[arg(long, default_value_t = 8)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Disable pruning of the propagated negatives.
        #[arg(long)]
        unpruned: bool,
    },
    /// Serve labeling sessions over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of datasets, one per subdirectory.
        #[arg(long)]
        data: PathBuf,
        /// Directory for session logs.
        #[arg(long)]
        logs: PathBuf,
        /// Static files for the labeling console.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Strategy(#[from] UnknownStrategy),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Failed(String),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            nodes,
            layers,
            edge_prob,
            dim,
            noise,
            seed,
            max_pairs,
            out,
        } => {
            let pool = generate_synthetic(&SyntheticConfig {
                n_nodes: nodes,
                n_layers: layers,
                edge_prob,
                dim,
                noise,
                seed,
                max_pairs,
            })?;
            write_dir(&pool, &out)?;
            println!(
                "{}",
                json!({
                    "out": out,
                    "n_nodes": pool.n_nodes(),
                    "n_pairs": pool.len(),
                    "positive_rate": pool.positive_rate(),
                    "feature_dim": pool.dim(),
                })
            );
        }
        Command::Run {
            config,
            dataset,
            out,
            strategy,
            no_reasoning,
            candidate_cap,
            retrain_every,
            eval_every,
            budget,
            n_trials,
            seed,
            balanced_seeds,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json_file(&path)?,
                None => ExperimentConfig::default(),
            };
            let kind = match strategy {
                Some(s) => s.parse::<StrategyKind>()?,
                None => cfg.strategy.kind(),
            };
            let reason = !no_reasoning && cfg.strategy.reason_on_update();
            cfg.strategy = Strategy::new(kind, reason);
            if candidate_cap.is_some() {
                cfg.candidate_cap = candidate_cap;
            }
            cfg.retrain_every = retrain_every.unwrap_or(cfg.retrain_every);
            cfg.eval_every = eval_every.unwrap_or(cfg.eval_every);
            cfg.budget = budget.unwrap_or(cfg.budget);
            cfg.n_trials = n_trials.unwrap_or(cfg.n_trials);
            cfg.rng_seed = seed.unwrap_or(cfg.rng_seed);
            cfg.split.balanced_seeds |= balanced_seeds;
            cfg.validate()?;
            let pool = load_dir(&dataset)?;
            let result = run_experiment(&pool, &cfg)?;
            write_outputs(&result, &out)?;
            let last = cfg.budget;
            let auc = result.row(last, Metric::Auc);
            let labeled = result.row(last, Metric::LabeledCount);
            println!(
                "{}",
                json!({
                    "strategy": cfg.strategy.display_name(),
                    "n_trials": result.traces.len(),
                    "budget": last,
                    "auc_mean": auc.map(|r| r.mean),
                    "auc_ci95": auc.map(|r| r.ci95),
                    "labeled_mean": labeled.map(|r| r.mean),
                    "soundness": result.soundness,
                    "out": out,
                })
            );
            if result.soundness.mismatches > 0 {
                return Err(CliError::Failed(format!("{} unsound deductions", result.soundness.mismatches)));
            }
        }
        Command::Bounds { dataset } => {
            let pool = load_dir(&dataset)?;
            let truth = pool.truth();
            let bounds = truth.query_bounds();
            println!(
                "{}",
                json!({
                    "n_nodes": pool.n_nodes(),
                    "n_pairs": pool.len(),
                    "relation_size": truth.len(),
                    "lower": bounds.lower,
                    "upper": bounds.upper,
                })
            );
        }
        Command::ClosureCheck {
            n_cases,
            max_nodes,
            seed,
            unpruned,
        } => {
            let pruning = if unpruned { Pruning::Unpruned } else { Pruning::Pruned };
            let mut rng = seeded(seed);
            let report = check_cases(n_cases, max_nodes, pruning, &mut rng);
            println!(
                "{}",
                json!({
                    "cases": report.cases,
                    "mismatches": report.mismatches,
                    "incomplete": report.incomplete,
                    "unsound": report.unsound,
                    "passed": report.passed(),
                })
            );
            if !report.passed() {
                return Err(CliError::Failed("closure check failed".into()));
            }
        }
        Command::Serve {
            port,
            data,
            logs,
            ui_dir,
        } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(ServeConfig {
                port,
                data_dir: data,
                logs_dir: logs,
                ui_dir,
            }))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
