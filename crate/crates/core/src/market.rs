//! Joint simulation of the pricing kernel and the rank variable `Z`.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::copula::{CopulaModel, JointMarketModel};
use crate::error::Result;
use crate::kernel::KernelModel;
use crate::normal;
use crate::rng::par_generate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Market {
    /// Unconstrained market; `Z = 1 − F_ρ(ρ)`.
    Plain { kernel: KernelModel },
    /// Payoffs must follow `copula` against the benchmark of `joint`.
    Copula { joint: JointMarketModel, copula: CopulaModel },
}

/// One simulated scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub rho: f64,
    /// Benchmark value, absent for the plain market.
    pub a: Option<f64>,
    pub z: f64,
    /// `1 − z`, computed without cancellation.
    pub z_tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Iid,
    /// One draw per stratum `[i/n, (i+1)/n)` of the rank `Z`.
    Stratified,
}

impl Market {
    pub fn plain(kernel: KernelModel) -> Self {
        Market::Plain { kernel }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Market::Plain { .. } => Ok(()),
            Market::Copula { joint, copula } => {
                joint.validate()?;
                copula.validate()
            }
        }
    }

    pub fn kernel(&self) -> &KernelModel {
        match self {
            Market::Plain { kernel } => kernel,
            Market::Copula { joint, .. } => &joint.kernel,
        }
    }

    pub fn delta(&self) -> f64 {
        self.kernel().mean()
    }

    /// `n` scenarios, deterministic in `seed`.
    pub fn simulate(&self, n: usize, seed: u64, sampling: Sampling) -> Vec<MarketState> {
        let uniform = move |rng: &mut rand_chacha::ChaCha8Rng, i: usize| -> f64 {
            let u: f64 = rng.sample(Open01);
            match sampling {
                Sampling::Iid => u,
                Sampling::Stratified => (i as f64 + u) / n as f64,
            }
        };
        match *self {
            Market::Plain { kernel } => par_generate(n, seed, |rng, i| {
                let s = uniform(rng, i);
                MarketState {
                    rho: kernel.quantile_unchecked(s),
                    a: None,
                    z: 1.0 - s,
                    z_tail: s,
                }
            }),
            Market::Copula { joint, copula } => par_generate(n, seed, |rng, i| {
                let (w2, e, y) = match sampling {
                    Sampling::Iid => {
                        let w2: f64 = rng.sample(StandardNormal);
                        let e: f64 = rng.sample(StandardNormal);
                        (w2, e, copula.cond_quantile_score(-e, w2))
                    }
                    Sampling::Stratified => {
                        // draw Y by stratum, then W₂ | Y ~ N(r·Y, 1 − r²)
                        let y = normal::inv_cdf(uniform(rng, i));
                        let r = copula.corr();
                        let g: f64 = rng.sample(StandardNormal);
                        let w2 = r * y + (1.0 - r * r).sqrt() * g;
                        let e = if r == 0.0 { -y } else { (r * w2 - y) / (1.0 - r * r).sqrt() };
                        (w2, e, y)
                    }
                };
                MarketState {
                    rho: joint.kernel.quantile_of_normal(joint.kernel_score(w2, e)),
                    a: Some(joint.benchmark.from_score(w2)),
                    z: normal::cdf(y),
                    z_tail: normal::cdf(-y),
                }
            }),
        }
    }
}
