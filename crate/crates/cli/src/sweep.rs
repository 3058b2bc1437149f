use std::fmt;
use std::io::Write;

use anyhow::anyhow;
use dtc_core::{CopulaModel, Error, KernelModel, KernelSpec, MixedMeasure, Solution};
use rayon::prelude::*;

use crate::config::InstanceConfig;
use crate::exit::{CliError, CliResult};

pub const HEADER: [&str; 6] = ["parameter", "case", "gamma_star", "value", "beta_star", "k_star"];

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Wealth,
    /// Replaces the measure by the point mass at the value.
    Alpha,
    Kernel(String),
    CopulaR,
    JointCorr,
}

impl Param {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "x" | "wealth" => Ok(Param::Wealth),
            "alpha" => Ok(Param::Alpha),
            "copula.r" => Ok(Param::CopulaR),
            "joint_corr" => Ok(Param::JointCorr),
            _ => match s.strip_prefix("kernel.") {
                Some(field) if !field.is_empty() => Ok(Param::Kernel(field.to_string())),
                _ => Err(CliError::input(anyhow!(
                    "unknown parameter {s:?}; expected x, alpha, kernel.<field>, copula.r or joint_corr"
                ))),
            },
        }
    }

    /// Checks that the parameter exists in `cfg` before any point is solved.
    fn check(&self, cfg: &InstanceConfig) -> CliResult<()> {
        let mut probe = cfg.clone();
        let current = match self {
            Param::Kernel(field) => kernel_field(&cfg.kernel.spec(), field)?,
            Param::CopulaR => match cfg.copula {
                Some(CopulaModel::Gaussian { r }) => r,
                _ => return Err(CliError::input(anyhow!("copula.r needs a gaussian copula"))),
            },
            Param::JointCorr if cfg.copula.is_none() => {
                return Err(CliError::input(anyhow!("joint_corr needs a copula")))
            }
            _ => return Ok(()),
        };
        self.apply(&mut probe, current)
    }

    fn apply(&self, cfg: &mut InstanceConfig, v: f64) -> CliResult<()> {
        match self {
            Param::Wealth => cfg.wealth = v,
            Param::Alpha => cfg.measure = MixedMeasure::dirac(v)?,
            Param::Kernel(field) => {
                let mut spec = cfg.kernel.spec();
                *kernel_field_mut(&mut spec, field)? = v;
                cfg.kernel = KernelModel::new(spec)?;
            }
            Param::CopulaR => cfg.copula = Some(CopulaModel::Gaussian { r: v }),
            Param::JointCorr => cfg.joint_corr = v,
        }
        cfg.validate()
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Wealth => f.write_str("x"),
            Param::Alpha => f.write_str("alpha"),
            Param::Kernel(field) => write!(f, "kernel.{field}"),
            Param::CopulaR => f.write_str("copula.r"),
            Param::JointCorr => f.write_str("joint_corr"),
        }
    }
}

fn kernel_field(spec: &KernelSpec, field: &str) -> CliResult<f64> {
    let mut s = *spec;
    kernel_field_mut(&mut s, field).map(|v| *v)
}

fn kernel_field_mut<'a>(spec: &'a mut KernelSpec, field: &str) -> CliResult<&'a mut f64> {
    match (spec, field) {
        (KernelSpec::Lognormal { mu, .. }, "mu") => Ok(mu),
        (KernelSpec::Lognormal { sigma, .. }, "sigma") => Ok(sigma),
        (KernelSpec::Uniform { a, .. }, "a") => Ok(a),
        (KernelSpec::Uniform { b, .. }, "b") => Ok(b),
        (KernelSpec::ShiftedExponential { shift, .. }, "shift") => Ok(shift),
        (KernelSpec::ShiftedExponential { rate, .. }, "rate") => Ok(rate),
        (spec, _) => Err(CliError::input(anyhow!("kernel {spec:?} has no field {field:?}"))),
    }
}

pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::input(anyhow!("bad value {t:?}: {e}"))))
        .collect()
}

pub fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::input(anyhow!("range must be lo:hi:n, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub parameter: f64,
    /// Case tag, or `inconclusive` when the classification could not be decided.
    pub case: String,
    pub gamma_star: Option<f64>,
    pub value: Option<f64>,
    pub beta_star: Option<f64>,
    pub k_star: Option<f64>,
}

impl Row {
    fn from_solution(parameter: f64, sol: &Solution) -> Self {
        Self {
            parameter,
            case: sol.case.to_string(),
            gamma_star: Some(sol.gamma_star),
            value: Some(sol.optimal_value),
            beta_star: sol.beta_star,
            k_star: sol.k_star,
        }
    }

    fn inconclusive(parameter: f64, err: &Error) -> Self {
        let gamma_star = match *err {
            Error::InconclusiveCase { gamma_star, .. } => Some(gamma_star),
            _ => None,
        };
        Self {
            parameter,
            case: "inconclusive".to_string(),
            gamma_star,
            value: None,
            beta_star: None,
            k_star: None,
        }
    }
}

/// Solves every grid point; rows keep the order of `grid`.
pub fn run(cfg: &InstanceConfig, param: &Param, grid: &[f64]) -> CliResult<Vec<Row>> {
    param.check(cfg)?;
    grid.par_iter()
        .map(|&v| {
            let mut point = cfg.clone();
            param
                .apply(&mut point, v)
                .map_err(|e| e.context(format!("{param} = {v}")))?;
            let cost = point.cost()?;
            match dtc_core::solve_profile(&point.measure, &cost, point.wealth, &point.search) {
                Ok(sol) => Ok(Row::from_solution(v, &sol)),
                Err(e @ (Error::InconclusiveCase { .. } | Error::InconclusiveSearch { .. })) => {
                    Ok(Row::inconclusive(v, &e))
                }
                Err(e) => Err(CliError::from(e).context(format!("{param} = {v}"))),
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(out: &mut dyn Write, rows: &[Row]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.parameter.to_string(),
            r.case.clone(),
            fmt_opt(r.gamma_star),
            fmt_opt(r.value),
            fmt_opt(r.beta_star),
            fmt_opt(r.k_star),
        ])?;
    }
    w.flush()?;
    Ok(())
}
