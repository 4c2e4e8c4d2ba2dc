//! `torus-nls`: command-line entry point for sampling, evolution, energy
//! decomposition, audits and Monte Carlo studies.

mod commands;
mod config;
mod log;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::FlagOverrides;

#[derive(Parser)]
#[command(name = "torus-nls", version, about = "Truncated quintic NLS on the torus: sampling, flows, energies, audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Dotted-path override, e.g. `--set params.n=4` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed for sampling and Monte Carlo.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Enumeration budget in tuple visits.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an ensemble from μ_s.
    Sample,
    /// Evolve a state and record conserved quantities.
    Evolve,
    /// Modified energy and its derivative (fast path).
    Energy,
    /// Full decomposition of the energy derivative with identity residuals.
    Decompose,
    /// Exhaustive or Monte Carlo audits.
    Audit {
        #[arg(value_enum)]
        which: AuditKind,
    },
    /// Monte Carlo experiments.
    Mc {
        #[arg(value_enum)]
        which: McKind,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AuditKind {
    Counting,
    PsiBound,
    PsiCorrector,
    Chaos,
    DualPath,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum McKind {
    Moments,
    Weights,
    Transport,
    PointwiseLaw,
    Convergence,
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(torus_nls::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<torus_nls::Error> for CliError {
    fn from(e: torus_nls::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use torus_nls::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Param(_)) => 2,
            CliError::Core(E::BudgetExceeded { .. }) => 3,
            CliError::Core(E::Integration { .. }) => 4,
            CliError::Core(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use torus_nls::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Param(_)) => "config",
            CliError::Core(E::BudgetExceeded { .. }) => "budget",
            CliError::Core(E::Integration { .. }) => "integration",
            CliError::Core(E::Constraint(_)) => "constraint",
            CliError::Core(E::Aliasing { .. }) => "aliasing",
            CliError::Core(E::Degenerate(_)) => "degenerate",
            CliError::Core(_) => "io",
        }
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Sample => "sample".into(),
        Command::Evolve => "evolve".into(),
        Command::Energy => "energy".into(),
        Command::Decompose => "decompose".into(),
        Command::Audit { which } => format!("audit {}", which.to_possible_value().unwrap().get_name()),
        Command::Mc { which } => format!("mc {}", which.to_possible_value().unwrap().get_name()),
    }
}

fn run(cli: &Cli, cfg: &config::RunConfig) -> Result<String, CliError> {
    if let Some(t) = cfg.threads {
        torus_nls::exec::init_thread_pool(t)?;
    }
    let name = command_name(&cli.command);
    log::info("start", json!({ "command": name, "out": cfg.out }));
    let mut r = commands::Run::new(cfg, &name);
    let summary = match &cli.command {
        Command::Sample => commands::sample(&mut r),
        Command::Evolve => commands::evolve_cmd(&mut r),
        Command::Energy => commands::energy(&mut r),
        Command::Decompose => commands::decompose(&mut r),
        Command::Audit { which } => commands::audit(&mut r, *which),
        Command::Mc { which } => commands::mc(&mut r, *which),
    }?;
    r.finish()?;
    log::info("done", json!({ "command": name }));
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = FlagOverrides {
        out: cli.out.clone(),
        seed: cli.seed,
        threads: cli.threads,
        budget: cli.budget,
    };
    let cfg = match config::load(cli.config.as_deref(), &cli.set, &flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            // Without a resolved config only an explicit --out is trusted.
            commands::report_error(cli.out.as_deref(), &e);
            return ExitCode::from(e.exit_code());
        }
    };
    match run(&cli, &cfg) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            commands::report_error(Some(&cfg.out), &e);
            ExitCode::from(e.exit_code())
        }
    }
}
