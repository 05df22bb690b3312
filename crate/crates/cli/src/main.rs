//! `compstruct`: CPF tables, samplers, checks, reconstruction and arrangement.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid parameters,
//! 3 exhaustive cap exceeded, 4 reconstruction infeasible.

mod commands;
mod family;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::family::{Construction, LawArgs};

pub const OUT_DIR_ENV: &str = "COMPSTRUCT_OUT_DIR";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<compstruct::Error> for CliError {
    fn from(e: compstruct::Error) -> Self {
        use compstruct::Error as E;
        let code = match e {
            E::CapExceeded { .. } => 3,
            E::Infeasible(_) => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Tab-separated records.
    Tsv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "compstruct",
    version,
    about = "Exact laws, samplers and checks for composition structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Tsv, global = true)]
    format: Format,
    /// Output file (stdout if absent). Relative paths resolve against
    /// $COMPSTRUCT_OUT_DIR when it is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full CPF table over all compositions of n.
    Cpf {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        n: usize,
    },
    /// Seeded draws with a count table against the exact law.
    Sample {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        /// Parallel streams; the output depends on (seed, replicas).
        #[arg(long, default_value_t = 4)]
        replicas: usize,
        #[arg(long, value_enum)]
        construction: Option<Construction>,
        /// Also write the draw log, one binary code per line.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Exact consistency checks; exits 1 if any fails.
    Check {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
        /// Comma-separated: uniform, right, left, last-part, decrement.
        #[arg(long, default_value = "uniform,right,last-part")]
        checks: String,
    },
    /// Decrement matrices and CPF rebuilt from structural moments p(1..N+1).
    Reconstruct {
        /// One `p/q` per line, or `index<TAB>p/q`.
        #[arg(long)]
        moments: PathBuf,
        /// Largest n of the emitted CPF tables (default: N, at most 10).
        #[arg(long)]
        n: Option<usize>,
        /// Compare against this family; exits 1 on mismatch.
        #[command(flatten)]
        law: LawArgs,
    },
    /// Seeded arrangements of a partition into compositions.
    Arrange {
        /// Parts, e.g. `2,1,1`.
        #[arg(long)]
        partition: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 4)]
        replicas: usize,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Ewens(θ) broken part by part by renewal(α).
    Fragment {
        #[arg(long)]
        theta: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        inner_reversed: bool,
        #[arg(long)]
        n: usize,
        /// Compare with the stationary Markov law of this Lévy pair; exits 1 on mismatch.
        #[arg(long, requires = "against_theta")]
        against_alpha: Option<String>,
        #[arg(long, requires = "against_alpha")]
        against_theta: Option<String>,
    },
}

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let path = resolve(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::invalid(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let fmt = cli.format;
    let out = match cli.command {
        Command::Cpf { law, n } => commands::cpf(&law, n, fmt)?,
        Command::Sample {
            law,
            n,
            seed,
            draws,
            replicas,
            construction,
            log,
        } => commands::sample(&law, n, seed, draws, replicas, construction, log.as_deref(), fmt)?,
        Command::Check { law, n_max, checks } => commands::check(&law, n_max, &checks, fmt)?,
        Command::Reconstruct { moments, n, law } => commands::reconstruct(&moments, n, &law, fmt)?,
        Command::Arrange {
            partition,
            alpha,
            theta,
            seed,
            draws,
            replicas,
            log,
        } => commands::arrange(&partition, &alpha, &theta, seed, draws, replicas, log.as_deref(), fmt)?,
        Command::Fragment {
            theta,
            alpha,
            inner_reversed,
            n,
            against_alpha,
            against_theta,
        } => commands::fragment(
            &theta,
            &alpha,
            inner_reversed,
            n,
            against_alpha.as_deref().zip(against_theta.as_deref()),
            fmt,
        )?,
    };
    match &cli.out {
        Some(path) => write_file(path, &out.text)?,
        None => print!("{}", out.text),
    }
    Ok(out.code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
