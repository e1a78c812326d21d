//! Experiment runner: builds constrained approximations, certifies growth,
//! and verifies SDE/ODE approximation bounds by simulation, emitting CSV and
//! SVG reports.
//!
//! Every command is deterministic given (config, seed); `--threads` changes
//! the worker count but never the results, and exit status is 0 iff every
//! assertion in the run passed.

mod commands;
mod config;
mod report;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use commands::Ctx;
use config::ConfigFile;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lingrow", version, about = "Growth-certified network gadgets and SDE error verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Override the config's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; must not change any result.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Progress chatter on stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build a constrained approximation with a growth certificate.
    Approx,
    /// Clamp an existing network to a box with margin.
    Clamp,
    /// Issue a growth certificate for a network file.
    Certify,
    /// Estimate a weighted or uniform sup norm.
    Norm,
    /// Common-noise strong error between an SDE and its approximation.
    SdeCompare,
    /// Closed-form constants of the quantitative error bounds.
    Bounds,
    /// ODE flow comparison against the weighted-perturbation bound.
    Flow,
    /// Dump ensembles or Euler-Maruyama trajectories to CSV.
    GenPaths,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("{failures} assertion(s) failed");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<usize> {
    let config_path = cli
        .config
        .context("--config <path> is required for every command")?;
    let config = ConfigFile::load(&config_path)?;
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output dir {}", cli.out.display()))?;
    let ctx = Ctx {
        out: cli.out.clone(),
        config_dir: config_path
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from(".")),
        seed_override: cli.seed,
        verbose: cli.verbose,
    };

    let body = || -> Result<usize> {
        match &cli.command {
            Command::Approx => {
                let section = config.approx.context("config has no [approx] section")?;
                commands::cmd_approx(&ctx, &section)
            }
            Command::Clamp => {
                let section = config.clamp.context("config has no [clamp] section")?;
                commands::cmd_clamp(&ctx, &section)
            }
            Command::Certify => {
                let section = config.certify.context("config has no [certify] section")?;
                commands::cmd_certify(&ctx, &section)
            }
            Command::Norm => {
                let section = config.norm.context("config has no [norm] section")?;
                commands::cmd_norm(&ctx, &section)
            }
            Command::SdeCompare => {
                let section = config
                    .sde_compare
                    .context("config has no [sde_compare] section")?;
                commands::cmd_sde_compare(&ctx, &section)
            }
            Command::Bounds => {
                let section = config.bounds.context("config has no [bounds] section")?;
                commands::cmd_bounds(&ctx, &section)
            }
            Command::Flow => {
                let section = config.flow.context("config has no [flow] section")?;
                commands::cmd_flow(&ctx, &section)
            }
            Command::GenPaths => {
                let section = config
                    .gen_paths
                    .context("config has no [gen_paths] section")?;
                commands::cmd_gen_paths(&ctx, &section)
            }
        }
    };

    match cli.threads {
        Some(n) => {
            if n == 0 {
                bail!("--threads must be >= 1");
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building thread pool")?;
            pool.install(body)
        }
        None => body(),
    }
}
