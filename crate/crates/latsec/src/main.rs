use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latsec::config::{parse_config, ConfigError, ExperimentConfig, Kind, SweepOf};
use latsec::envelope::{emit, Format};
use latsec::run::{run, RunError};

#[derive(Parser)]
#[command(name = "latsec", version, about = "Exact secrecy experiments on nested lattice codebooks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a nested lattice pair and list its codebook.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Check the exact bounds on a codebook.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Run a channel simulation.
    Simulate {
        #[command(subcommand)]
        what: SimulateWhat,
    },
    /// Compare against a baseline codebook.
    Compare {
        #[command(subcommand)]
        what: CompareWhat,
    },
    /// Run a suite over the grid of configurations.
    Sweep {
        /// Suite to run; overrides `sweep` in the config.
        #[arg(long, value_parser = parse_sweep)]
        of: Option<SweepOf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum LatticeAction {
    Build(Common),
}

#[derive(Subcommand)]
enum VerifyWhat {
    /// Sum-set, sum-entropy and leakage bounds.
    Lemmas(Common),
    /// Leakage of the binned codebook and the equivocation identity.
    Theorem1(Common),
}

#[derive(Subcommand)]
enum SimulateWhat {
    /// Regime classification, secrecy and reliability end to end.
    Pipeline(Common),
    /// Exact layered sum distributions.
    Layered(Common),
}

#[derive(Subcommand)]
enum CompareWhat {
    /// Random codebooks of the same size.
    Random(Common),
}

#[derive(Args)]
struct Common {
    /// Config file, `key = value` lines or a JSON object.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Root seed; overrides `rootSeed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials; overrides `trials`.
    #[arg(long)]
    trials: Option<u64>,
    /// Work budget; overrides `budget`.
    #[arg(long)]
    budget: Option<u64>,
}

fn parse_sweep(s: &str) -> Result<SweepOf, String> {
    s.parse()
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Emit(#[from] latsec::envelope::EmitError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(e) if e.is_budget() => 3,
            _ => 2,
        }
    }
}

fn load(kind: Kind, common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            parse_config(&text, kind).map_err(RunError::from)?
        }
        None => ExperimentConfig::defaults(kind),
    };
    if cfg.kind != kind {
        return Err(RunError::from(ConfigError::Validation {
            field: "kind".to_string(),
            reason: format!("config is `{}` but the command runs `{}`", cfg.kind.as_str(), kind.as_str()),
        })
        .into());
    }
    if let Some(s) = common.seed {
        cfg.root_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(b) = common.budget {
        cfg.budget = b;
    }
    Ok(cfg)
}

fn execute(kind: Kind, sweep: Option<SweepOf>, common: &Common) -> Result<u8, CliError> {
    let mut cfg = load(kind, common)?;
    if let Some(s) = sweep {
        cfg.sweep = s;
    }
    let env = run(&cfg)?;
    let default_format = if kind == Kind::Sweep { Format::Csv } else { Format::Json };
    emit(&env, common.format.unwrap_or(default_format), common.out.as_deref())?;
    for c in &env.verdict.checks {
        eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if env.verdict.budget_exceeded {
        3
    } else if !env.verdict.passed {
        1
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, sweep, common) = match &cli.command {
        Command::Lattice {
            action: LatticeAction::Build(c),
        } => (Kind::Lattice, None, c),
        Command::Verify { what } => match what {
            VerifyWhat::Lemmas(c) => (Kind::Lemmas, None, c),
            VerifyWhat::Theorem1(c) => (Kind::Theorem1, None, c),
        },
        Command::Simulate { what } => match what {
            SimulateWhat::Pipeline(c) => (Kind::Pipeline, None, c),
            SimulateWhat::Layered(c) => (Kind::Layered, None, c),
        },
        Command::Compare {
            what: CompareWhat::Random(c),
        } => (Kind::Baseline, None, c),
        Command::Sweep { of, common } => (Kind::Sweep, *of, common),
    };
    match execute(kind, sweep, common) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
