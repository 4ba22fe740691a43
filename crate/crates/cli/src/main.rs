use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod cmd;
mod config;
mod inputs;
mod report;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "cytoloc",
    version,
    about = "Ground truth, centroid extraction and localization-error evaluation for cell detection"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON run configuration; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-file work (default 1).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Suppress the human-readable summary.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Render density-map targets from centroid CSVs.
    Gengt(cmd::gengt::GengtArgs),
    /// Extract centroids from density maps or label masks.
    Extract(cmd::extract::ExtractArgs),
    /// Match predictions to ground truth and report El, P, R and F.
    Eval(cmd::eval::EvalArgs),
    /// Combine per-fold evaluation reports.
    Xval(cmd::xval::XvalArgs),
    /// Generate seeded synthetic scenes.
    Synth(cmd::synth::SynthArgs),
    /// Measure extraction throughput in nuclei per second.
    Bench(cmd::bench::BenchArgs),
    /// Scatter plot of El against inference rate.
    Plot(cmd::plot::PlotArgs),
}

/// Settings shared by every command.
pub struct Ctx {
    pub config: RunConfig,
    pub seed: u64,
    pub jobs: usize,
    pub quiet: bool,
}

impl Ctx {
    pub fn say(&self, line: impl Display) {
        if !self.quiet {
            println!("{line}");
        }
    }

    /// Pool sized by `--jobs`; callers collect results in input order, so
    /// output never depends on the worker count.
    pub fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .context("cannot start worker threads")
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let jobs = cli.global.jobs.or(config.jobs).unwrap_or(1);
    anyhow::ensure!(jobs >= 1, "--jobs must be at least 1");
    let ctx = Ctx {
        seed: cli.global.seed.or(config.seed).unwrap_or(0),
        jobs,
        quiet: cli.global.quiet,
        config,
    };
    match cli.command {
        Command::Gengt(args) => cmd::gengt::run(&ctx, args),
        Command::Extract(args) => cmd::extract::run(&ctx, args),
        Command::Eval(args) => cmd::eval::run(&ctx, args),
        Command::Xval(args) => cmd::xval::run(&ctx, args),
        Command::Synth(args) => cmd::synth::run(&ctx, args),
        Command::Bench(args) => cmd::bench::run(&ctx, args),
        Command::Plot(args) => cmd::plot::run(&ctx, args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
