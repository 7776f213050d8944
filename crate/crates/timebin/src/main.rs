use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};
use timebin::formats::{self, ResultJson};
use timebin::pipeline::{self, RESULT, TABLES};
use timebin::{oracle, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "timebin", version, about = "Time-bin entanglement experiment simulator")]
struct Cli {
    /// Experiment configuration (JSON); missing fields take built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; run i uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel phase-setting jobs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Monte Carlo resamples for the error bars.
    #[arg(long, global = true, default_value_t = 100)]
    mc_runs: usize,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one time-tag file per phase setting.
    Simulate,
    /// Histograms and coincidence tables from time-tag files.
    Analyze {
        /// run_phi_<xx>_<x>.tbe files; default: those in the output manifest.
        files: Vec<PathBuf>,
    },
    /// State reconstruction from a tables directory or time-tag files.
    Tomography {
        /// A directory with tables.json, or .tbe files; default: the output directory.
        inputs: Vec<PathBuf>,
    },
    /// Human-readable summary of a tomography result.
    Report {
        /// result.json; default: the one in the output directory.
        result: Option<PathBuf>,
    },
    /// Analytic oracle checks.
    Selftest,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn input_files(files: &[PathBuf], cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    if files.is_empty() {
        pipeline::manifest_files(&cfg.output_dir)
    } else {
        Ok(files.to_vec())
    }
}

fn tables_for(
    inputs: &[PathBuf],
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<timebin::core::engine::CoincidenceTable>> {
    match inputs {
        [] => pipeline::load_tables(&cfg.output_dir),
        [dir] if dir.is_dir() => pipeline::load_tables(dir),
        files => {
            let runs = pipeline::analyze_files(files, cfg, jobs)?;
            Ok(runs.into_iter().map(|r| r.table).collect())
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Command::Selftest = cli.command {
        let checks = oracle::selftest();
        for c in &checks {
            println!("{} {:<32} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        return Ok(checks.iter().all(|c| c.passed));
    }
    if let Command::Report { result } = &cli.command {
        let path = match result {
            Some(p) => p.clone(),
            None => load_config(cli)?.output_dir.join(RESULT),
        };
        let r: ResultJson = formats::read_json(&path)?;
        print!("{}", pipeline::render_report(&r));
        return Ok(true);
    }

    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate => {
            let m = pipeline::cmd_simulate(&cfg, cli.jobs)?;
            info!("wrote {} runs to {}", m.runs.len(), cfg.output_dir.display());
        }
        Command::Analyze { files } => {
            let files = input_files(files, &cfg)?;
            let runs = pipeline::cmd_analyze(&files, &cfg, cli.jobs)?;
            info!("wrote {} tables and {} to {}", runs.len(), TABLES, cfg.output_dir.display());
        }
        Command::Tomography { inputs } => {
            let tables = tables_for(inputs, &cfg, cli.jobs)?;
            let r = pipeline::cmd_tomography(&tables, &cfg, cli.mc_runs, cfg.run.seed)?;
            info!(
                "F = {:.4} +- {:.4}, C = {:.4} +- {:.4}; wrote {}",
                r.metrics.fidelity,
                r.metrics.sigma_fidelity,
                r.metrics.concurrence,
                r.metrics.sigma_concurrence,
                Path::new(&cfg.output_dir).join(RESULT).display()
            );
        }
        Command::Report { .. } | Command::Selftest => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
