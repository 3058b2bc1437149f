//! Front end for `dtc-core`: reads JSON instances, runs the solver, certifies
//! solutions and sweeps one parameter at a time.

pub mod config;
pub mod exit;
pub mod plots;
pub mod sweep;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dtc_core::{certify, solve_profile, Solution};

pub use config::{InstanceConfig, Overrides};
pub use exit::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dtc", version, about = "Optimal digital payoffs under distortion preferences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and print the solution as JSON.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Write zeta.csv and payoff.csv (or sequence.csv) into this directory.
        #[arg(long, value_name = "DIR")]
        emit_plots: Option<PathBuf>,
    },
    /// Check a solution by oracle search and simulation; exits 1 if a check fails.
    Certify {
        #[command(flatten)]
        run: RunArgs,
        /// Solution JSON from `dtc solve`; solved afresh when omitted.
        #[arg(long, value_name = "FILE")]
        solution: Option<PathBuf>,
    },
    /// Solve over a grid of one parameter and print CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// x, alpha, kernel.<field>, copula.r or joint_corr.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// `lo:hi:n`, n evenly spaced points including both ends.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Instance configuration (JSON).
    pub config: PathBuf,
    /// Monte Carlo sample size for the copula cost estimate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for the copula cost estimate.
    #[arg(long, env = "DTC_SEED")]
    pub seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> CliResult<InstanceConfig> {
        let mut cfg = InstanceConfig::load(&self.config)?;
        cfg.apply_flags(self.n, self.seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn solve_instance(cfg: &InstanceConfig) -> CliResult<Solution> {
    let cost = cfg.cost()?;
    Ok(solve_profile(&cfg.measure, &cost, cfg.wealth, &cfg.search)?)
}

/// Runs a command, writing its primary output to `out`. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    match cli.command {
        Command::Solve { run, emit_plots } => {
            let cfg = run.load()?;
            let sol = solve_instance(&cfg)?;
            if let Some(dir) = emit_plots {
                plots::write_all(&dir, &cfg, &sol)?;
            }
            write_json(out, &sol)?;
            Ok(exit::OK)
        }
        Command::Certify { run, solution } => {
            let cfg = run.load()?;
            let mut sol = match solution {
                Some(path) => read_solution(&path)?,
                None => solve_instance(&cfg)?,
            };
            apply_overrides(&mut sol, &cfg.overrides);
            let report = certify(&sol, &cfg.measure, &cfg.market()?, cfg.wealth, &cfg.certify_config())?;
            for check in report.failed() {
                eprintln!("check {} failed: {}", check.name, check.detail);
            }
            write_json(out, &report)?;
            Ok(if report.passed { exit::OK } else { exit::CHECK_FAILED })
        }
        Command::Sweep {
            run,
            param,
            values,
            range,
        } => {
            let cfg = run.load()?;
            let param = sweep::Param::parse(&param)?;
            let grid = match (values, range) {
                (Some(v), _) => sweep::parse_values(&v)?,
                (None, Some(r)) => sweep::parse_range(&r)?,
                (None, None) => unreachable!("clap requires one of --values and --range"),
            };
            let rows = sweep::run(&cfg, &param, &grid)?;
            sweep::write_csv(out, &rows)?;
            Ok(exit::OK)
        }
    }
}

fn write_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn read_solution(path: &PathBuf) -> CliResult<Solution> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(CliError::input)?;
    serde_json::from_str(&text)
        .with_context(|| format!("malformed solution in {}", path.display()))
        .map_err(CliError::input)
}

fn apply_overrides(sol: &mut Solution, o: &Overrides) {
    if let Some(k) = o.k_star {
        sol.k_star = Some(k);
    }
    if let Some(c) = o.c_star {
        sol.c_star = Some(c);
        sol.s_star = Some(1.0 - c);
    }
    if let Some(b) = o.beta_star {
        sol.beta_star = Some(b);
    }
}
