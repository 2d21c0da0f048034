mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Policy;

#[derive(Parser, Debug)]
#[command(name = "hyperevent", version, about = "Relational hyperevent models for publication streams")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "HYPEREVENT_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub actors: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub citation_policy: Option<Policy>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SamplingArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub author_controls: Option<usize>,
    #[arg(long)]
    pub citation_controls: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Which {
    Author,
    Citation,
    #[default]
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an events file against the stream invariants.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the raw (or transformed) design matrices as CSV.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        model: Which,
        /// Apply the fitted transform before writing.
        #[arg(long)]
        transformed: bool,
    },
    /// Fit the author and/or citation model.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        model: Which,
        /// Also compute the AIC contribution ledger.
        #[arg(long)]
        ledger: bool,
    },
    /// Fit and write only the AIC contribution ledger.
    Aic {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        model: Which,
    },
    /// Generate a synthetic events file and actors file.
    Simulate {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_actors: Option<usize>,
        #[arg(long)]
        n_events: Option<usize>,
    },
    /// Run a parameter-recovery experiment.
    Recover {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Rate ratio exp(coefficient x delta) with a 95% interval.
    Interpret {
        /// Fit artifact (`fit_<model>.json`) to read the coefficient from.
        #[arg(long, requires = "kind")]
        fit: Option<PathBuf>,
        /// Statistic label, e.g. `coauthor_pair_rep`.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, conflicts_with = "fit", allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, conflicts_with = "fit", default_value_t = 0.0)]
        se: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        delta: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_status(&e))
        }
    }
}
