//! CSV side files for plotting.

use std::fs;
use std::path::Path;

use dtc_core::{payoff_value, CaseTag, Market, Solution};

use crate::config::InstanceConfig;
use crate::exit::CliResult;

const PAYOFF_POINTS: usize = 201;

pub fn write_all(dir: &Path, cfg: &InstanceConfig, sol: &Solution) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    write_zeta(&dir.join("zeta.csv"), sol)?;
    match sol.case {
        CaseTag::RiskFree | CaseTag::Digital => write_payoff(&dir.join("payoff.csv"), cfg, sol),
        CaseTag::Infinite | CaseTag::Unattained => write_sequence(&dir.join("sequence.csv"), sol),
    }
}

/// Search grid and tail probes, ordered by `c`.
fn write_zeta(path: &Path, sol: &Solution) -> CliResult<()> {
    let d = &sol.diagnostics;
    let mut points: Vec<_> = d.grid.iter().chain(&d.probes).copied().collect();
    points.sort_by(|a, b| a.c.total_cmp(&b.c).then(b.s.total_cmp(&a.s)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["c", "s", "zeta"])?;
    for p in points {
        w.write_record([p.c.to_string(), p.s.to_string(), p.zeta.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Payoff against `ρ` in the plain market and against the rank `Z` otherwise.
fn write_payoff(path: &Path, cfg: &InstanceConfig, sol: &Solution) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let levels = (0..PAYOFF_POINTS).map(|i| (i as f64 + 0.5) / PAYOFF_POINTS as f64);
    match cfg.market()? {
        Market::Plain { kernel } => {
            w.write_record(["rho", "payoff"])?;
            for p in levels {
                let rho = kernel.quantile(p)?;
                w.write_record([rho.to_string(), payoff_value(sol, rho)?.to_string()])?;
            }
        }
        Market::Copula { .. } => {
            w.write_record(["z", "payoff"])?;
            for z in levels {
                w.write_record([z.to_string(), sol.payoff_at_rank(z)?.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_sequence(path: &Path, sol: &Solution) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "c", "s", "k", "beta", "value"])?;
    for t in &sol.sequence {
        w.write_record([
            t.n.to_string(),
            t.c.to_string(),
            t.s.to_string(),
            t.k.to_string(),
            t.beta.map(|b| b.to_string()).unwrap_or_default(),
            t.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
