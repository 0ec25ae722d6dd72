//! `magspec` command-line driver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::output::OutDir;

#[derive(Debug, Parser)]
#[command(
    name = "magspec",
    version,
    about = "Complex eigenvalues near Landau levels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Landau level index; overrides `scan.level`.
    #[arg(long)]
    level: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, env = "MAGSPEC_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Toeplitz eigenvalues and counting table.
    Toeplitz(Common),
    /// Determinant zeros in the configured region.
    Scan(Common),
    /// Counting and localization checks; exit status 0 iff all pass.
    Verify(Common),
    /// Dense Galerkin eigenvalues with stability tags.
    Oracle(Common),
    /// Counting function against its asymptotic comparator.
    Asymptotics(Common),
}

fn run(cli: Cli) -> Result<bool> {
    let (common, which) = match &cli.command {
        Command::Toeplitz(c) => (c, "toeplitz"),
        Command::Scan(c) => (c, "scan"),
        Command::Verify(c) => (c, "verify"),
        Command::Oracle(c) => (c, "oracle"),
        Command::Asymptotics(c) => (c, "asymptotics"),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = Config::load(&common.config)?;
    let out = OutDir::create(&common.out)?;
    log::info!("running {which} with {}", common.config.display());
    match cli.command {
        Command::Toeplitz(_) => commands::toeplitz(&cfg, common.level, &out).map(|_| true),
        Command::Scan(_) => commands::scan(&cfg, common.level, &out).map(|_| true),
        Command::Verify(_) => commands::verify(&cfg, common.level, &out),
        Command::Oracle(_) => commands::oracle(&cfg, common.level, &out).map(|_| true),
        Command::Asymptotics(_) => commands::asymptotics(&cfg, common.level, &out).map(|_| true),
    }
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<magspec::Error>())
        .map_or("error", magspec::Error::kind);
    let chain: Vec<String> = err.chain().map(ToString::to_string).collect();
    serde_json::json!({ "error": kind, "message": err.to_string(), "causes": chain })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
