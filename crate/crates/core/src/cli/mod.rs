//! Batch front-end: TOML configuration, experiment dispatch, CSV/summary/plot
//! output and binary checkpoints.

mod checkpoint;
mod config;
mod execute;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::experiments::{identity_suite, ExperimentError, SuiteConfig};
use crate::norms::seminorms;

pub use checkpoint::{decode, encode, read_checkpoint, write_checkpoint, Checkpoint, CheckpointError, MAGIC, VERSION};
pub use config::{
    parse_config, ConfigError, Experiment, GridConfig, InitConfig, InitKind, OutputConfig, RunConfig,
};
pub use execute::{execute, initial_state, timeseries_csv, RunStatus, CSV_COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HALLMHD_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "hallmhd", version, about = "Pseudo-spectral Hall-MHD simulator on the periodic box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run the identity and cancellation suite.
    Verify {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 8)]
        max_kmax: usize,
    },
    /// Print a checkpoint header and the norms of its fields.
    Inspect { checkpoint: PathBuf },
}

/// One `PASS`/`FAIL` line per check, and whether all passed.
pub fn verify_report(config: &SuiteConfig) -> Result<(String, bool), CliError> {
    let outcomes = identity_suite(config)?;
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(
            text,
            "{} {:<30} worst {:.3e} (tolerance {:.0e}, {} samples)",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.worst,
            o.tolerance,
            o.samples
        );
    }
    Ok((text, outcomes.iter().all(|o| o.passed)))
}

pub fn inspect(path: &Path) -> Result<String, CheckpointError> {
    let c = read_checkpoint(path)?;
    let g = c.state.u.grid();
    let (u, b) = (seminorms(&c.state.u), seminorms(&c.state.b));
    let mut out = String::new();
    let _ = writeln!(out, "version = {VERSION}");
    let _ = writeln!(out, "n = {}", g.n());
    let _ = writeln!(out, "length = {:.17e}", g.length());
    let _ = writeln!(out, "t = {:.17e}", c.state.t);
    let _ = writeln!(out, "mu = {:.17e}", c.mu);
    let _ = writeln!(out, "gamma = {:.17e}", c.gamma);
    for (name, r) in [("u", u), ("b", b)] {
        let _ = writeln!(out, "{name}.l2 = {:.17e}", r.l2);
        let _ = writeln!(out, "{name}.h1 = {:.17e}", r.h1);
        let _ = writeln!(out, "{name}.h2 = {:.17e}", r.h2);
        let _ = writeln!(out, "{name}.h3 = {:.17e}", r.h3);
    }
    Ok(out)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer (got '{raw}')"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer (got '{raw}')"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

/// Execute a parsed command and return the process exit code.
pub fn dispatch(cli: Cli) -> i32 {
    if let Err(m) = configure_threads() {
        eprintln!("error: {m}");
        return EXIT_CONFIG;
    }
    match cli.command {
        Command::Run { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return EXIT_CONFIG;
                }
            };
            let parsed = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return EXIT_CONFIG;
                }
            };
            match execute(&parsed) {
                Ok(RunStatus::Ok) => EXIT_OK,
                Ok(RunStatus::SolverFailure) => {
                    eprintln!("solver failure; see {}", parsed.output.dir.join("summary.txt").display());
                    EXIT_SOLVER
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Verify { n, seeds, max_kmax } => {
            match verify_report(&SuiteConfig { n, seeds, max_kmax, ..SuiteConfig::default() }) {
                Ok((text, passed)) => {
                    print!("{text}");
                    if passed {
                        EXIT_OK
                    } else {
                        EXIT_VERIFY
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Inspect { checkpoint } => match inspect(&checkpoint) {
            Ok(text) => {
                print!("{text}");
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_parses() {
        let c = Cli::try_parse_from(["hallmhd", "verify", "--n", "32", "--seeds", "3"]).unwrap();
        assert!(matches!(c.command, Command::Verify { n: 32, seeds: 3, max_kmax: 8 }));
        let c = Cli::try_parse_from(["hallmhd", "run", "a.toml"]).unwrap();
        assert!(matches!(c.command, Command::Run { .. }));
        assert!(Cli::try_parse_from(["hallmhd", "explode"]).is_err());
    }

    #[test]
    fn verify_report_lines() {
        let (text, passed) = verify_report(&SuiteConfig { n: 32, seeds: 2, max_kmax: 3, tolerance: 1e-10 }).unwrap();
        assert!(passed);
        assert_eq!(text.lines().count(), 16);
        assert!(text.lines().all(|l| l.starts_with("PASS ")));
    }
}
