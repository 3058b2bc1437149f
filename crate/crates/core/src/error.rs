use thiserror::Error;

use crate::measure::Violation;
use crate::solver::CaseTag;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid measure: {}", join(.0))]
    InvalidMeasure(Vec<Violation>),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid copula: {0}")]
    InvalidCopula(String),

    #[error("invalid market model: {0}")]
    InvalidMarket(String),

    #[error("invalid cost profile: {0}")]
    InvalidProfile(String),

    /// The sup search could not bracket `γ*`; the true value lies in `[lower, upper]`.
    #[error("sup search inconclusive: gamma* lies in [{lower}, {upper}]")]
    InconclusiveSearch { lower: f64, upper: f64 },

    /// `γ*·δ` is too close to 1 to separate the risk-free case from the digital ones.
    #[error(
        "classification inconclusive: gamma*·delta = {scaled} is within {band:e} of 1 \
         (candidates: {} or {})", .candidates[0], .candidates[1]
    )]
    InconclusiveCase {
        gamma_star: f64,
        delta: f64,
        scaled: f64,
        band: f64,
        candidates: [CaseTag; 2],
    },

    #[error("bin {bin} of {bins} received no samples; use at most {suggested} bins")]
    EmptyBin {
        bin: usize,
        bins: usize,
        suggested: usize,
    },

    #[error("operation is not defined for case {0}")]
    UnsupportedCase(CaseTag),

    #[error("sample is empty")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "(0, 1)",
        })
    }
}
