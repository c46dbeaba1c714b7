mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{Analysis, RunConfig};
use crate::error::CliError;
use crate::output::Emitter;

/// Numerical value-distribution toolkit for holomorphic curves.
#[derive(Parser, Debug)]
#[command(name = "holocurve", version)]
struct Cli {
    /// Analysis to run.
    #[arg(value_enum)]
    command: Analysis,

    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory; defaults to the config's `output_dir`, else `out/<command>`.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(&cli.config, cli.command, cli.seed)?;
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let dir = cli
        .output
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(cli.command.name()));
    let mut out = Emitter::new(&dir, cfg.echo.clone())?;
    commands::run(&cfg, &mut out)?;
    let files = out.finish(cli.command.name())?;
    println!("wrote {} files and manifest.json to {}", files.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
