//! `nvmem` command-line front end: `run`, `parse-check`, `fit`, `sweep`.
//!
//! Exit codes: 0 success, 1 runtime failure (or a fit that did not
//! converge), 2 usage or configuration error.

pub mod config;
mod output;
mod run;
pub mod units;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigError, RateTable, RunConfig, SweepConfig, SweepParameter};
pub use output::{params_hash, read_columns, write_csv};
pub use run::{run_experiment, Outcome};

/// Experiment names accepted by `run` and `[sweep] experiment`.
pub const EXPERIMENTS: [&str; 7] = [
    "rabi",
    "fid",
    "init-tomography",
    "purification",
    "transfer",
    "cpmg",
    "extended-dd",
];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<crate::experiments::ExperimentError> for CliError {
    fn from(e: crate::experiments::ExperimentError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "nvmem", version, about = "NV electron / 13C nuclear spin memory simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (default: `out`, or `out =` in the config).
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectories per ensemble.
    #[arg(long)]
    ensemble: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write `<name>.csv` + `<name>.meta.json`.
    Run {
        experiment: String,
        #[command(flatten)]
        common: Common,
    },
    /// Parse and validate a pulse-sequence file.
    ParseCheck {
        path: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Fit a model (cosine, exponential, rates) to CSV data.
    Fit {
        model: String,
        /// One CSV, or two (total, up) for `rates`.
        #[arg(required = true, num_args = 1..=2)]
        csv: Vec<PathBuf>,
        /// Fix the exponential offset.
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<f64>,
    },
    /// Scan one parameter as configured under `[sweep]`.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut c = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        c.seed = Some(s);
    }
    if let Some(n) = common.ensemble {
        if n < 2 {
            return Err(CliError::Usage("--ensemble needs at least two trajectories".into()));
        }
        c.ensemble = n;
    }
    if let Some(o) = &common.out {
        c.out = Some(o.clone());
    }
    Ok(c)
}

fn out_dir(c: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn configure_threads() {
    if let Some(n) = std::env::var("NVMEM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { experiment, common } => {
            if !EXPERIMENTS.contains(&experiment.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown experiment `{experiment}`; available: {}",
                    EXPERIMENTS.join(", ")
                )));
            }
            let c = load_config(&common)?;
            let dir = out_dir(&c)?;
            let outcome = run_experiment(&experiment, &c)?;
            output::write_outcome(&dir, &outcome, &c)?;
            writeln!(out, "{}: {}", outcome.headline.0, output::fmt_value(outcome.headline.1))?;
            Ok(0)
        }
        Command::ParseCheck { path, config } => {
            let c = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            run::parse_check(&path, &c, out)
        }
        Command::Fit { model, csv, offset } => run::fit(&model, &csv, offset, out),
        Command::Sweep { common } => {
            let c = load_config(&common)?;
            let sweep = c
                .sweep
                .clone()
                .ok_or_else(|| CliError::Usage("config has no [sweep] section".into()))?;
            let dir = out_dir(&c)?;
            let rows = run::sweep(&c, &sweep)?;
            let path = output::write_sweep(&dir, &c, &sweep, &rows)?;
            writeln!(out, "{} rows -> {}", rows.len(), path.display())?;
            Ok(0)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn main_with(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    configure_threads();
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.message());
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    main_with(std::env::args_os().collect(), &mut stdout.lock(), &mut stderr.lock())
}
