//! `pirlab` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 correctness failure,
//! 4 failed audit check.

mod audit;
mod capacity;
mod config;
mod leakage;
mod output;
mod pruw_demo;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pirlab", version, about = "Simulate and audit private information retrieval schemes")]
struct Cli {
    /// TOML file with default values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one retrieval (or one PRUW roundtrip) and report costs.
    Run(run::RunArgs),
    /// Exhaustively audit privacy constraints.
    Audit(audit::AuditArgs),
    /// Evaluate a capacity formula.
    Capacity(capacity::CapacityArgs),
    /// Leakage entropy of segmented sparse updates, as CSV.
    Leakage(leakage::LeakageArgs),
    /// Private read-update-write demonstration with optional distortion.
    PruwDemo(pruw_demo::PruwArgs),
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Correctness(String),
    Audit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Correctness(_) => 3,
            Failure::Audit(_) => 4,
        }
    }
}

macro_rules! config_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Config(e.into())
            }
        }
    )*};
}

config_errors!(
    anyhow::Error,
    pirlab::Error,
    std::io::Error,
    serde_json::Error,
    csv::Error,
    toml::de::Error,
    rayon::ThreadPoolBuildError
);

pub type CliResult<T = ()> = Result<T, Failure>;

fn init_threads() -> CliResult {
    if let Ok(v) = std::env::var("PIRLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("PIRLAB_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            return Err(anyhow::anyhow!("PIRLAB_THREADS must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult {
    init_threads()?;
    let file = config::FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Run(a) => run::cmd_run(&a.resolve(&file)?),
        Command::Audit(a) => audit::cmd_audit(&a.resolve(&file)?),
        Command::Capacity(a) => capacity::cmd_capacity(&a),
        Command::Leakage(a) => leakage::cmd_leakage(&a.resolve(&file)?),
        Command::PruwDemo(a) => pruw_demo::cmd_pruw_demo(&a.resolve(&file)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("error: {e:#}"),
                Failure::Correctness(m) => eprintln!("correctness failure: {m}"),
                Failure::Audit(m) => eprintln!("audit failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
