use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use langevin_kit_cli::{write_outputs, CliError, CliResult, Command, ExperimentConfig};

/// Langevin Monte Carlo experiments: plans, bounds, chains and validation.
#[derive(Parser)]
#[command(name = "langevin-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Experiment config (JSON). Optional for `figure1`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the sampler seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, env = "LANGEVIN_KIT_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Smallest iteration count reaching a target precision.
    Plan,
    /// Evaluate one guarantee.
    Bound,
    /// Run one chain; write its trace and final state.
    Sample,
    /// Iteration counts of three guarantees over a dimension grid.
    Figure1,
    /// Bound vs exact and empirical W2 on a Gaussian target.
    Validate,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if matches!(cli.command, Sub::Figure1) => ExperimentConfig::from_json("{}")?,
        None => return Err(CliError::Config("--config is required".into())),
    };
    if let Some(seed) = cli.seed {
        if let Some(s) = cfg.sampler.as_mut() {
            s.seed = seed;
        }
    }
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    for flag in cfg.hypotheses()? {
        if !flag.holds {
            log::warn!("hypothesis `{}` does not hold", flag.condition);
        }
    }
    let command = match cli.command {
        Sub::Plan => Command::Plan,
        Sub::Bound => Command::Bound,
        Sub::Sample => Command::Sample,
        Sub::Figure1 => Command::Figure1,
        Sub::Validate => Command::Validate,
    };
    for path in write_outputs(command, &cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::to_string(&e.report()).expect("error report serializes");
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
