//! `gscatter`: scattering features, frame checks, stability reports and
//! kernel fits from the command line.
//!
//! Exit codes: 0 on success, 1 when a checked bound fails, 2 on input errors.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graph_scatter::spectral::Preset;

use crate::config::{DatasetConfig, RunConfig};

#[derive(Parser)]
#[command(name = "gscatter", version, about = "Graph scattering transforms and their stability checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every scattering output of every descriptor signal.
    Scatter(Common),
    /// Report frame bounds A and B of a filter bank over an interval.
    ValidateFrame(Common),
    /// Run an operator or split-vertex stability experiment.
    Perturb(Common),
    /// Write the layer energies W_n next to their decay bound.
    Energy(Common),
    /// Write graph-level aggregated features.
    Aggregate(Common),
    /// Cross-validate kernel ridge regression or nearest-centroid classification.
    Fit(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    /// `architecture_I` or `architecture_II`.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for per-graph and per-sample work.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dataset path, overriding the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Dataset format: `edge_list_multi`, `adjacency_csv` or `molecules`.
    #[arg(long)]
    format: Option<graph_scatter::dataset::DatasetFormat>,
}

impl Common {
    fn run_config(&self) -> graph_scatter::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        cfg.depth = self.depth.or(cfg.depth);
        cfg.preset = self.preset.or(cfg.preset);
        cfg.seed = self.seed.or(cfg.seed);
        cfg.jobs = self.jobs.or(cfg.jobs);
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if let Some(path) = &self.dataset {
            let (format, descriptors) = match cfg.dataset.take() {
                Some(d) => (d.format, d.descriptors),
                None => (graph_scatter::dataset::DatasetFormat::EdgeListMulti, None),
            };
            // Paths from the command line are relative to the working directory.
            let path = std::path::absolute(path).unwrap_or_else(|_| path.clone());
            cfg.dataset = Some(DatasetConfig { path, format, descriptors });
        }
        if let (Some(format), Some(d)) = (self.format, cfg.dataset.as_mut()) {
            d.format = format;
        }
        Ok(cfg)
    }
}

enum Failure {
    Input(String),
    Bound(String),
}

fn run(cli: Cli) -> Result<String, Failure> {
    let (common, command): (&Common, fn(&RunConfig) -> graph_scatter::Result<commands::Outcome>) = match &cli.command {
        Command::Scatter(c) => (c, commands::cmd_scatter),
        Command::ValidateFrame(c) => (c, commands::cmd_validate_frame),
        Command::Perturb(c) => (c, commands::cmd_perturb),
        Command::Energy(c) => (c, commands::cmd_energy),
        Command::Aggregate(c) => (c, commands::cmd_aggregate),
        Command::Fit(c) => (c, commands::cmd_fit),
    };
    let cfg = common.run_config().map_err(|e| Failure::Input(e.to_string()))?;
    let jobs = cfg.jobs.unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Input(format!("cannot start {jobs} worker threads: {e}")))?;
    let outcome = pool.install(|| command(&cfg)).map_err(|e| Failure::Input(e.to_string()))?;
    match outcome.failure {
        Some(msg) => {
            print!("{}", outcome.text);
            Err(Failure::Bound(msg))
        }
        None => Ok(outcome.text),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let (message, code) = match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(text.as_bytes());
            return ExitCode::SUCCESS;
        }
        Err(Failure::Bound(m)) => (m, 1),
        Err(Failure::Input(m)) => (m, 2),
    };
    eprintln!("error: {}", message.replace('\n', " "));
    ExitCode::from(code)
}
