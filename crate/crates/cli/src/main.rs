//! Command-line front end for the spillover toolkit.
//!
//! Exit codes: 0 success, 2 invalid arguments or configuration, 3 unreadable
//! or malformed data, 4 numerical failure.

mod commands;
mod config;
mod meta;

use clap::Parser;
use commands::Command;
use config::ConfigMap;
use spillover_core::{Error, ErrorKind, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "spillover", version, about = "Volatility spillover toolkit")]
struct Cli {
    /// key=value file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for rolling windows and replications (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = ConfigMap::load(cli.config.as_deref())?;
    let threads = config::resolve(cli.threads, &mut cfg, "threads", 0usize)?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParam {
                name: "threads",
                reason: e.to_string(),
            })?;
    }
    commands::dispatch(cli.command, &mut cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numerical => 4,
            };
            ExitCode::from(code)
        }
    }
}
