//! `ipdg`: convergence studies, penalty-parameter sweeps, and the models
//! that learn a good penalty from the sweep data.
//!
//! Every command reads a `key = value` config file, applies `--set`
//! overrides on top, writes a replayable resolved-config copy beside its
//! outputs, and exits 0 on success, 1 on a lost rate / failed quality
//! gate, 2 on usage or config errors.

mod config;
mod convergence;
mod manifest;
mod sweeps;
mod training;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ipdg",
    version,
    about = "Interior-penalty DG studies, sweeps, and penalty recommendation models",
    after_help = "Outputs land in --out-dir, else $IPDG_OUT_DIR, else the working directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Config file of `key = value` lines (# comments allowed).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. --set beta=10 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory; defaults to $IPDG_OUT_DIR, then ".".
    #[arg(long)]
    out_dir: Option<String>,

    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    show_config: bool,

    /// Cap the number of parallel workers.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one manufactured-case convergence study; exit 0 iff the rate is optimal.
    Convergence(CommonArgs),
    /// Label every (theta, kappa, beta, h, k) study of an elliptic case family.
    SweepElliptic(CommonArgs),
    /// Label first-step pressure quality across the layered-column grid.
    SweepBiot(CommonArgs),
    /// Record iteration counts over a beta grid on one fixed mesh.
    ProfileIterations(CommonArgs),
    /// Fit a linear, logistic or MLP model to a sweep dataset.
    Train(CommonArgs),
    /// Score a saved model on its held-out test split.
    Evaluate(CommonArgs),
    /// Recommend penalty values from a trained classifier and cost model.
    Predict(CommonArgs),
}

/// Defaults, then config file, then --set pairs, then --out-dir. Returns
/// None when --show-config already answered the invocation.
fn prepare<C: RunConfig>(args: &CommonArgs) -> Result<Option<C>> {
    let mut cfg = C::default();
    if let Some(path) = &args.config {
        for (key, value) in config::parse_file(path)? {
            cfg.set(&key, &value)?;
        }
    }
    for pair in &args.set {
        let (key, value) = config::parse_override(pair)?;
        cfg.set(&key, &value)?;
    }
    if let Some(dir) = &args.out_dir {
        cfg.set("out_dir", dir)?;
    }
    if args.show_config {
        print!("{}", config::render(&cfg.entries()));
        return Ok(None);
    }
    if let Some(jobs) = args.jobs {
        // Worker count changes wall time only; record orders are fixed.
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().ok();
    }
    Ok(Some(cfg))
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Convergence(args) => match prepare::<convergence::ConvergenceConfig>(args)? {
            Some(cfg) => convergence::run(&cfg)?,
            None => 0,
        },
        Command::SweepElliptic(args) => match prepare::<sweeps::SweepEllipticConfig>(args)? {
            Some(cfg) => sweeps::run_sweep_elliptic(&cfg)?,
            None => 0,
        },
        Command::SweepBiot(args) => match prepare::<sweeps::SweepBiotConfig>(args)? {
            Some(cfg) => sweeps::run_sweep_biot(&cfg)?,
            None => 0,
        },
        Command::ProfileIterations(args) => match prepare::<sweeps::ProfileConfig>(args)? {
            Some(cfg) => sweeps::run_profile(&cfg)?,
            None => 0,
        },
        Command::Train(args) => match prepare::<training::TrainCommandConfig>(args)? {
            Some(cfg) => training::run_train(&cfg)?,
            None => 0,
        },
        Command::Evaluate(args) => match prepare::<training::EvaluateConfig>(args)? {
            Some(cfg) => training::run_evaluate(&cfg)?,
            None => 0,
        },
        Command::Predict(args) => match prepare::<training::PredictConfig>(args)? {
            Some(cfg) => training::run_predict(&cfg)?,
            None => 0,
        },
    };
    Ok(code)
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}
