//! Command-line front end for `qimd-core`.
//!
//! Every run takes one JSON configuration document (from `--config` or
//! standard input), lets a few flags override it, and writes CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::{IsTerminal, Read};
use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::Parser;

use crate::commands::Outcome;
pub use crate::config::{Format, Overrides, RunConfig, Subcommand};
pub use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "qimd",
    version,
    about = "Phase-uncertainty closed forms, working points and Monte-Carlo checks"
)]
pub struct Cli {
    /// What to run.
    #[arg(value_enum)]
    pub command: Subcommand,

    /// JSON configuration file; standard input when absent.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for Monte-Carlo runs; overrides `mc.seed`.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Worker threads; rayon's default when absent.
    #[arg(long, value_name = "N")]
    pub workers: Option<NonZeroUsize>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

fn read_config(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display()))),
        None => {
            let stdin = std::io::stdin();
            if stdin.is_terminal() {
                return Ok(String::new());
            }
            let mut text = String::new();
            stdin.lock().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

/// Runs one subcommand against a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let hash = cfg.hash();
    let subcommand = cfg
        .subcommand
        .ok_or_else(|| CliError::Config("configuration is not bound to a subcommand".into()))?;
    match subcommand {
        Subcommand::Analytic => commands::analytic::run_analytic(cfg, &hash),
        Subcommand::Wp => commands::analytic::run_wp(cfg, &hash),
        Subcommand::Mc => commands::mc::run_mc(cfg, &hash),
        Subcommand::Sweep => commands::sweep::run_sweep(cfg, &hash),
        Subcommand::Tables => commands::tables::run_tables(cfg, &hash),
    }
}

fn run_cli(cli: &Cli) -> Result<i32, CliError> {
    let text = read_config(cli.config.as_ref())?;
    let cfg = RunConfig::parse(&text)?.resolve(cli.command, &cli.overrides())?;
    log::debug!("config {}", cfg.canonical_json());
    let outcome = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.get())
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?
            .install(|| execute(&cfg))?,
        None => execute(&cfg)?,
    };
    output::emit(&outcome.artifacts, cfg.output.path.as_deref())?;
    Ok(outcome.exit_code)
}

/// Parses `args`, runs, and returns the process exit code. Errors are
/// reported on standard error as a single JSON line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return exit::OK;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
