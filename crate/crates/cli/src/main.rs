//! `wigmagic` command-line runner.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 bad usage, input or
//! I/O.

mod commands;
mod config;
mod state;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use commands::Report;
use config::{FileConfig, Format, RunConfig, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "wigmagic", version, about = "Wigner-negativity magic measures for qubits")]
struct Cli {
    /// TOML file with defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for result files.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Option<Command>,
}

/// Parser for the `command` string of a config file.
#[derive(Debug, Parser)]
#[command(name = "wigmagic")]
struct ConfigCommand {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Enumerate the pure stabilizer states on n qubits.
    EnumerateStabilizers {
        #[arg(long)]
        n: usize,
    },
    /// Wigner vector of a state.
    Wigner {
        #[arg(long)]
        state: String,
    },
    /// Wigner-distance magic C with its dual witness.
    Distance {
        #[arg(long)]
        state: String,
    },
    /// Stabilizer extent Γ with a minimal decomposition.
    Extent {
        #[arg(long)]
        state: String,
    },
    /// C, Γ and κ = Γ/C along a two-qubit family.
    KappaSweep {
        #[arg(long)]
        family: wigmagic::families::FamilyId,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Superadditivity deficits of rho ⊗ sigma over a sigma grid.
    Dichotomy {
        /// Azimuths of sigma (comma separated).
        #[arg(long, value_delimiter = ',')]
        phi: Vec<f64>,
        /// The fixed single-qubit state rho.
        #[arg(long, default_value = "t-state")]
        rho: String,
    },
    /// Fit of the deficit against C(rho) for northern sigma.
    Regression,
    /// C and κ under two-qubit depolarizing noise.
    NoiseSweep {
        #[arg(long)]
        family: wigmagic::families::FamilyId,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        p_step: Option<f64>,
        #[arg(long)]
        p_max: Option<f64>,
    },
    /// Change of C under H ⊗ I on Haar-random states.
    Monotonicity {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tensor-product checks: equatorial additivity, self-tensor,
    /// submultiplicativity, simulation bound.
    TensorSuite {
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Multi-start search for the largest two-qubit C.
    MaxC {
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Check the structural invariants up to n qubits.
    Verify {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EnumerateStabilizers { .. } => "enumerate-stabilizers",
            Command::Wigner { .. } => "wigner",
            Command::Distance { .. } => "distance",
            Command::Extent { .. } => "extent",
            Command::KappaSweep { .. } => "kappa-sweep",
            Command::Dichotomy { .. } => "dichotomy",
            Command::Regression => "regression",
            Command::NoiseSweep { .. } => "noise-sweep",
            Command::Monotonicity { .. } => "monotonicity",
            Command::TensorSuite { .. } => "tensor-suite",
            Command::MaxC { .. } => "max-c",
            Command::Verify { .. } => "verify",
        }
    }
}

fn resolve(cli: Cli) -> anyhow::Result<(Command, RunConfig)> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let command = match (cli.command, &file.command) {
        (Some(c), _) => c,
        (None, Some(line)) => {
            let words = std::iter::once("wigmagic").chain(line.split_whitespace());
            ConfigCommand::try_parse_from(words)
                .map_err(|e| anyhow::anyhow!("config command {line:?}: {e}"))?
                .command
        }
        (None, None) => anyhow::bail!("no command given; see `wigmagic --help`"),
    };
    let run = RunConfig {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        threads: cli.threads.or(file.threads),
        output_dir: cli.output.or(file.output).unwrap_or_else(|| PathBuf::from("results")),
        format: cli.format.or(file.format).unwrap_or_default(),
        cache_dir: file.cache_dir,
        tolerances: file.tolerances,
        grids: file.grids,
    };
    run.validate()?;
    Ok((command, run))
}

fn setup(run: &RunConfig) -> anyhow::Result<()> {
    // The environment variable wins over the config file.
    if let Some(dir) = &run.cache_dir {
        if std::env::var_os(wigmagic::stabgen::CACHE_DIR_ENV).is_none() {
            std::env::set_var(wigmagic::stabgen::CACHE_DIR_ENV, dir);
        }
    }
    if let Some(n) = run.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("building thread pool")?;
    }
    Ok(())
}

fn run(command: &Command, cfg: &RunConfig) -> anyhow::Result<Report> {
    setup(cfg)?;
    let report = commands::dispatch(command, cfg)?;
    report.write(command.name(), cfg)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, cfg) = match resolve(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&command, &cfg) {
        Ok(report) => {
            println!("{}", report.line);
            match report.pass {
                Some(false) => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
