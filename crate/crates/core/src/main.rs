use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;

use underlay::harness::{
    allocation_violations, oracle_check, run_mobility, run_sweep, run_trace, schedule_options, schedule_timed,
    write_rows, write_sweep, ExperimentConfig, MobilityConfig, TraceRow, MOBILITY_COLUMNS,
    TRACE_COLUMNS,
};
use underlay::matching::Registry;
use underlay::scenario::generate_scenario;

/// Matching and power allocation experiments for dense underlay C-V2X cells.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean metrics per (algorithm, N, M/N) point as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Also write the objective traces of trial 0 of every point here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sum rate per snapshot while the vehicles move.
    Mobility {
        #[command(flatten)]
        common: Common,
    },
    /// Per-iteration objective of every CL in one trial.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Trial index to trace.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Output CSV; takes precedence over --out.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Brute-force oracles on random small groups plus allocation
    /// invariants on trial 0 of every sweep point. Exits nonzero on any
    /// violation.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Grid nodes per axis for the local-optimality certificate.
        #[arg(long, default_value_t = 500)]
        resolution: usize,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated scheduler names.
    #[arg(long, value_delimiter = ',')]
    algorithm: Vec<String>,
    /// Comma-separated numbers of CVLs.
    #[arg(long, value_delimiter = ',')]
    n_cvl: Vec<usize>,
    /// Comma-separated NCVLs per CVL (M/N).
    #[arg(long, value_delimiter = ',')]
    density: Vec<usize>,
    /// Trials per point (random instances for oracle-check).
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial k uses seed ^ k.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if !self.algorithm.is_empty() {
            config.algorithms = self.algorithm.clone();
        }
        if !self.n_cvl.is_empty() {
            config.n_cvl = self.n_cvl.clone();
        }
        if !self.density.is_empty() {
            config.density = self.density.clone();
        }
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(s) = self.seed {
            config.base_seed = s;
        }
        config.validate()?;
        Ok(config)
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn traces(config: &ExperimentConfig, trial: u64) -> anyhow::Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for point in config.points() {
        rows.extend(run_trace(config, &point, trial)?);
    }
    Ok(rows)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sweep { common, trace } => {
            let config = common.config()?;
            info!("{} points x {} trials", config.points().len(), config.trials);
            let table = run_sweep(&config)?;
            write_sweep(output(common.out.as_deref())?, &table)?;
            if let Some(path) = trace {
                write_rows(output(Some(&path))?, &TRACE_COLUMNS, &traces(&config, 0)?)?;
            }
        }
        Command::Mobility { common } => {
            let mut config = common.config()?;
            config.mobility.get_or_insert_with(MobilityConfig::default);
            let rows = run_mobility(&config)?;
            write_rows(output(common.out.as_deref())?, &MOBILITY_COLUMNS, &rows)?;
        }
        Command::Trace { common, trial, trace } => {
            let config = common.config()?;
            let rows = traces(&config, trial)?;
            write_rows(output(trace.as_deref().or(common.out.as_deref()))?, &TRACE_COLUMNS, &rows)?;
        }
        Command::OracleCheck { common, resolution } => {
            let mut config = common.config()?;
            if common.trials.is_none() {
                config.trials = 500;
            }
            let mut report = oracle_check(config.trials, config.base_seed, resolution)?;
            let registry = Registry::default();
            for point in config.points() {
                let scenario = generate_scenario(&config.params_for(&point, 0))?;
                let (alloc, _) =
                    schedule_timed(&registry, &point.algorithm, &scenario, &schedule_options(&config), config.trial_seed(0))?;
                for msg in allocation_violations(&scenario, &alloc) {
                    report.violations.push(format!("{point:?}: {msg}"));
                }
            }
            let mut out = output(common.out.as_deref())?;
            writeln!(
                out,
                "feasibility instances: {}\npower instances: {}\nsweep points: {}\nviolations: {}",
                report.feasibility_checked,
                report.power_checked,
                config.points().len(),
                report.violations.len()
            )?;
            for v in &report.violations {
                writeln!(out, "  {v}")?;
            }
            if !report.violations.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
