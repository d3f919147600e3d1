use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use blaschke_cli::config::ConfigError;
use blaschke_cli::{run, ExperimentConfig, Operation};
use clap::{Parser, Subcommand};

/// Forward iteration of finite Blaschke products: experiments and checks.
#[derive(Debug, Parser)]
#[command(name = "blaschke", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML). Without it the built-in defaults are used.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[arg(long = "degree-cap", global = true, value_name = "N")]
    degree_cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Materialize composites and dump their zeros and rotations.
    Compose,
    /// Classification and Frostman sums, Blaschke sum, interior gauges.
    Diagnose,
    /// Boundary orbits, L1 distances of boundary maps, KS tests.
    Boundary,
    /// Interior gauge against boundary oscillation for long sequences.
    Counterexample,
    /// Run the full property suite; exits nonzero if any check fails.
    Verify,
}

impl From<Command> for Operation {
    fn from(c: Command) -> Self {
        match c {
            Command::Compose => Operation::Compose,
            Command::Diagnose => Operation::Diagnose,
            Command::Boundary => Operation::Boundary,
            Command::Counterexample => Operation::Counterexample,
            Command::Verify => Operation::Verify,
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(cap) = cli.degree_cap {
        cfg.degree_cap = cap;
    }
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    cfg.validate().map_err(ConfigError::Invalid)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }

    let op = Operation::from(cli.command);
    match run(op, &cfg).with_context(|| format!("{} failed", op.name())) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
