//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and I/O errors, 2 when a numeric
//! routine fails.

pub mod commands;
pub mod config;
pub mod io;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigFile, Overrides, Preset, RunConfig};
pub use io::{Format, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tristeer",
    version,
    about = "Death and revival of tripartite steering under dephasing"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config file with flat keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path; standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    #[arg(long, value_enum, global = true)]
    pub preset: Option<Preset>,
    /// Grid points per stage.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub corr: Option<f64>,
    /// Stage length in wavelengths.
    #[arg(long, global = true)]
    pub l_max: Option<f64>,
    /// Worker threads; rayon's default when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Witness curves over both stages.
    Scan,
    /// Fit a curve column with the Gaussian death model, or the revival
    /// model with `--stage u2`.
    Fit(FitArgs),
    /// BLP non-Markovianity of Alice's dephasing.
    Nonmark(NonmarkArgs),
    /// Simulated tomography, reconstruction and Monte Carlo error bars.
    Tomo(TomoArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Curve file written by `scan`.
    pub input: PathBuf,
    #[arg(long)]
    pub column: String,
    #[arg(long, default_value = "u1")]
    pub stage: String,
}

#[derive(Debug, Args)]
pub struct NonmarkArgs {
    /// Number of sampled probe pairs.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    /// Shots per setting.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    /// Use exact Born frequencies instead of sampling.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 100)]
    pub resamples: usize,
    /// Thickness at which the scanned state is measured.
    #[arg(long, default_value_t = 0.0)]
    pub thickness: f64,
    /// Where to write the simulated counts table.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Reconstruct from an existing counts table instead of simulating.
    #[arg(long, conflicts_with = "exact")]
    pub from_counts: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Numeric(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match cli.global.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?
            .install(|| commands::dispatch(cli)),
        None => commands::dispatch(cli),
    }
}
