use std::fs;
use std::path::Path;

use anyhow::Context;
use dtc_core::verify::CertifyConfig;
use dtc_core::{
    Benchmark, CopulaModel, CostProfile, JointMarketModel, KernelModel, Market, McConfig, MixedMeasure, SearchConfig,
};
use serde::{Deserialize, Serialize};

use crate::exit::{CliError, CliResult};

/// Replaces fields of a computed solution before certification.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub k_star: Option<f64>,
    pub c_star: Option<f64>,
    pub beta_star: Option<f64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.k_star.is_none() && self.c_star.is_none() && self.beta_star.is_none()
    }
}

/// One problem instance as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub measure: MixedMeasure,
    pub kernel: KernelModel,
    #[serde(alias = "x")]
    pub wealth: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copula: Option<CopulaModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<Benchmark>,
    #[serde(default)]
    pub joint_corr: f64,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
}

impl InstanceConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(CliError::input)?;
        Self::parse(&text).map_err(|e| e.context(format!("in {}", path.display())))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            CliError::input(anyhow::anyhow!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.wealth.is_finite() && self.wealth > 0.0) {
            return Err(CliError::input(anyhow::anyhow!("wealth must be positive, got {}", self.wealth)));
        }
        if self.benchmark.is_some() && self.copula.is_none() {
            return Err(CliError::input(anyhow::anyhow!("benchmark given without a copula")));
        }
        self.market()?.validate().map_err(CliError::from)?;
        Ok(())
    }

    pub fn market(&self) -> CliResult<Market> {
        match self.copula {
            None => Ok(Market::plain(self.kernel)),
            Some(copula) => {
                let benchmark = self
                    .benchmark
                    .ok_or_else(|| CliError::input(anyhow::anyhow!("a copula needs a benchmark")))?;
                let joint = JointMarketModel::new(self.kernel, benchmark, self.joint_corr)?;
                Ok(Market::Copula { joint, copula })
            }
        }
    }

    /// Certification settings; `φ̂` is rebuilt with the instance's own Monte Carlo settings.
    pub fn certify_config(&self) -> CertifyConfig {
        CertifyConfig {
            mc: self.mc,
            ..self.certify.clone()
        }
    }

    /// Cost profile the solver runs on.
    pub fn cost(&self) -> CliResult<CostProfile> {
        match self.market()? {
            Market::Plain { kernel } => Ok(CostProfile::Kernel(kernel)),
            Market::Copula { joint, copula } => Ok(CostProfile::Binned(dtc_core::phi_estimate(
                &joint,
                &copula,
                self.mc.n,
                self.mc.bins(),
                self.mc.seed,
            )?)),
        }
    }

    pub fn apply_flags(&mut self, n: Option<usize>, seed: Option<u64>) {
        if let Some(n) = n {
            self.mc.n = n;
        }
        if let Some(seed) = seed {
            self.mc.seed = seed;
        }
    }
}
