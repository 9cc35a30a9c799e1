//! `mmot`: command-line runner for the transport, representability and
//! Fourier tools in `mmot-core`.
//!
//! Exit codes: 0 on success, 1 on a domain error (infeasible problem, failed
//! check, exhausted budget), 2 on a configuration or usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmot_core::mmot::{Formulation, DEFAULT_BUDGET};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input files, invalid configs.
    #[error("{0}")]
    Config(String),
    #[error("{message}")]
    Domain { kind: &'static str, message: String },
}

impl CliError {
    pub fn domain(kind: &'static str, message: impl ToString) -> Self {
        CliError::Domain {
            kind,
            message: message.to_string(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Domain { kind, .. } => kind,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mmot", version, about = "Multi-marginal transport and N-representability tools")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random choice (default 0, or the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of LP variables per solve.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Report errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Output directory (default `mmot-out`, or the config's `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl GlobalOpts {
    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("mmot-out"))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormulationArg {
    Direct,
    Reduced,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Direct => Formulation::Direct,
            FormulationArg::Reduced => Formulation::Reduced,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one symmetric multi-marginal transport problem.
    Solve {
        /// One-body measure (JSON).
        #[arg(long)]
        mu: PathBuf,
        /// Cost spec, e.g. `gaussian:s=0.7071` or `coulomb`.
        #[arg(long)]
        cost: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "direct")]
        formulation: FormulationArg,
        /// Also dump the direct LP in MPS format.
        #[arg(long)]
        mps: Option<PathBuf>,
    },
    /// Decide whether a pair measure is N-representable.
    Repcheck {
        /// Pair measure (JSON).
        #[arg(long)]
        mu2: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Compare an exchangeable N-body measure with its de Finetti lift.
    Lift {
        /// N-body measure (JSON).
        #[arg(long)]
        gamma: PathBuf,
        /// Also check the k-marginal bound.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Split the infinite-body cost of a mixture into mean field and variance.
    Fourier {
        /// Mixture (JSON).
        #[arg(long)]
        mixture: PathBuf,
        #[arg(long)]
        cost: String,
    },
    /// Run the experiments listed in a TOML (or JSON) config.
    Experiment { config: PathBuf },
    /// Run the invariant suite of every module.
    Validate,
}

fn report(err: &CliError, json_errors: bool) {
    if json_errors {
        let doc = json!({
            "error": {
                "kind": err.kind(),
                "message": err.to_string(),
                "exit_code": err.exit_code(),
            }
        });
        eprintln!("{doc}");
    } else {
        eprintln!("error: {err}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Solve {
            mu,
            cost,
            n,
            formulation,
            mps,
        } => commands::solve(g, &mu, &cost, n, formulation.into(), mps.as_deref()),
        Command::Repcheck { mu2, n } => commands::repcheck(g, &mu2, n),
        Command::Lift { gamma, k } => commands::lift(g, &gamma, k),
        Command::Fourier { mixture, cost } => commands::fourier(g, &mixture, &cost),
        Command::Experiment { config } => commands::experiment(g, &config),
        Command::Validate => commands::validate(g),
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if json_errors => {
            report(&CliError::Config(e.render().to_string().trim().to_string()), true);
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e, json_errors);
            ExitCode::from(e.exit_code())
        }
    }
}
