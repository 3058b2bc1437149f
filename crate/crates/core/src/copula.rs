//! The copula-constrained market.
//!
//! `ρ` and the benchmark `A` are driven by correlated standard normals:
//! `ρ = F_ρ⁻¹(Φ(W₁))`, `A = exp(μ_A + σ_A·W₂)`, `corr(W₁, W₂) = r_m`. Writing
//! `W₁ = r_m·W₂ + √(1−r_m²)·E`, the conditional rank is `F_{ρ|A}(ρ, A) = Φ(E)`,
//! and for a Gaussian copula with parameter `r` the transformed rank is
//! `Z = Φ(Y)` with `Y = r·W₂ − √(1−r²)·E`. `Y` is standard normal and jointly
//! Gaussian with `W₁`, with correlation `b = r_m·r − √(1−r_m²)·√(1−r²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelModel, KernelSpec};
use crate::market::{Market, Sampling};
use crate::measure::MixedMeasure;
use crate::normal;
use crate::profile::{BinStat, BinnedCost, CostProfile};
use crate::quad::{self, QuadConfig};
use crate::rng::BLOCK;
use crate::solver::{solve_profile, SearchConfig, Solution};

use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CopulaModel {
    Gaussian { r: f64 },
    Independence,
}

impl CopulaModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaModel::Gaussian { r } if !(r.is_finite() && r.abs() < 1.0) => {
                Err(Error::InvalidCopula(format!("gaussian copula needs |r| < 1, got {r}")))
            }
            _ => Ok(()),
        }
    }

    /// Correlation parameter; 0 for independence.
    pub fn corr(&self) -> f64 {
        match *self {
            CopulaModel::Gaussian { r } => r,
            CopulaModel::Independence => 0.0,
        }
    }

    /// `C_{1|2}(u | v) = ∂C(u,v)/∂v`.
    pub fn cond_cdf(&self, u: f64, v: f64) -> f64 {
        let r = self.corr();
        if r == 0.0 {
            return u.clamp(0.0, 1.0);
        }
        normal::cdf((normal::inv_cdf(u) - r * normal::inv_cdf(v)) / (1.0 - r * r).sqrt())
    }

    /// `C⁻¹_{1|2}(t | v)`.
    pub fn cond_quantile(&self, t: f64, v: f64) -> f64 {
        let r = self.corr();
        if r == 0.0 {
            return t.clamp(0.0, 1.0);
        }
        normal::cdf(self.cond_quantile_score(normal::inv_cdf(t), normal::inv_cdf(v)))
    }

    /// `Φ⁻¹ ∘ C⁻¹_{1|2}` expressed on normal scores of `t` and `v`.
    pub(crate) fn cond_quantile_score(&self, t_score: f64, v_score: f64) -> f64 {
        let r = self.corr();
        if r == 0.0 {
            return t_score;
        }
        r * v_score + (1.0 - r * r).sqrt() * t_score
    }

    /// `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        if self.corr() == 0.0 {
            return u * v;
        }
        let cfg = QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        quad::integrate(|w| self.cond_cdf(u, w), 0.0, v, cfg).value
    }
}

/// Lognormal benchmark `A = exp(mu + sigma·W₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Benchmark {
    pub mu: f64,
    pub sigma: f64,
}

impl Benchmark {
    pub fn cdf(&self, a: f64) -> f64 {
        normal::cdf(self.normal_score(a))
    }

    pub fn normal_score(&self, a: f64) -> f64 {
        if a <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (a.ln() - self.mu) / self.sigma
        }
    }

    pub fn from_score(&self, w: f64) -> f64 {
        (self.mu + self.sigma * w).exp()
    }
}

/// Joint law of `(ρ, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointMarketModel {
    pub kernel: KernelModel,
    pub benchmark: Benchmark,
    /// `corr(W₁, W₂)`.
    pub joint_corr: f64,
}

impl JointMarketModel {
    pub fn new(kernel: KernelModel, benchmark: Benchmark, joint_corr: f64) -> Result<Self> {
        let j = Self {
            kernel,
            benchmark,
            joint_corr,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.benchmark;
        if !(b.mu.is_finite() && b.sigma.is_finite() && b.sigma > 0.0) {
            return Err(Error::InvalidMarket(format!(
                "benchmark needs finite mu and sigma > 0, got mu = {}, sigma = {}",
                b.mu, b.sigma
            )));
        }
        if !(self.joint_corr.is_finite() && self.joint_corr.abs() < 1.0) {
            return Err(Error::InvalidMarket(format!(
                "joint_corr must lie in (-1, 1) so that rho given A stays continuous, got {}",
                self.joint_corr
            )));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.kernel.mean()
    }

    fn residual_scale(&self) -> f64 {
        (1.0 - self.joint_corr * self.joint_corr).sqrt()
    }

    /// Idiosyncratic score `E` given the scores of `ρ` and `A`.
    pub(crate) fn residual(&self, w1: f64, w2: f64) -> f64 {
        (w1 - self.joint_corr * w2) / self.residual_scale()
    }

    /// `W₁` from `W₂` and `E`.
    pub(crate) fn kernel_score(&self, w2: f64, e: f64) -> f64 {
        self.joint_corr * w2 + self.residual_scale() * e
    }

    /// `F_{ρ|A}(ρ, a)`.
    pub fn cond_cdf(&self, rho: f64, a: f64) -> f64 {
        normal::cdf(self.residual(self.kernel.normal_score(rho), self.benchmark.normal_score(a)))
    }

    /// `corr(W₁, Φ⁻¹(Z))`.
    pub fn score_corr(&self, copula: &CopulaModel) -> f64 {
        let r = copula.corr();
        self.joint_corr * r - self.residual_scale() * (1.0 - r * r).sqrt()
    }

    /// `lim_{z→1} φ(z)`.
    pub fn phi_limit(&self, copula: &CopulaModel) -> f64 {
        let b = self.score_corr(copula);
        if b < 0.0 {
            self.kernel.essinf()
        } else if b > 0.0 {
            self.kernel.esssup()
        } else {
            self.kernel.mean()
        }
    }

    /// `φ(z) = E[ρ | Z = z]`, exact up to quadrature.
    pub fn phi_exact(&self, copula: &CopulaModel, z: f64) -> f64 {
        let b = self.score_corr(copula);
        let y = normal::inv_cdf(z);
        let tau = (1.0 - b * b).max(0.0).sqrt();
        if let KernelSpec::Lognormal { mu, sigma } = self.kernel.spec() {
            return (mu + sigma * b * y + 0.5 * sigma * sigma * tau * tau).exp();
        }
        if tau < 1e-12 {
            return self.kernel.quantile_of_normal(b * y);
        }
        let cfg = QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let f = |w: f64| {
            self.kernel.quantile_of_normal(b * y + tau * w) * (-0.5 * w * w).exp()
                / (2.0 * std::f64::consts::PI).sqrt()
        };
        quad::integrate(f, -12.0, 12.0, cfg).value
    }
}

/// `Z = C⁻¹_{1|2}(1 − F_{ρ|A}(ρ, A), F_A(A))`.
pub fn z_transform(joint: &JointMarketModel, copula: &CopulaModel, rho: f64, a: f64) -> f64 {
    let w2 = joint.benchmark.normal_score(a);
    let e = joint.residual(joint.kernel.normal_score(rho), w2);
    normal::cdf(copula.cond_quantile_score(-e, w2))
}

/// Monte Carlo settings for the `φ` estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n: usize,
    /// Defaults to `⌈n^{1/3}⌉`.
    pub bins: Option<usize>,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n: 1_000_000,
            bins: None,
            seed: 42,
        }
    }
}

impl McConfig {
    pub fn bins(&self) -> usize {
        self.bins.unwrap_or_else(|| (self.n as f64).cbrt().ceil() as usize)
    }
}

/// Binned estimate of `φ` from `n` joint draws.
///
/// Bin `b` collects `Z ∈ [b/B, (b+1)/B)` and carries the sample mean of `ρ`.
pub fn phi_estimate(
    joint: &JointMarketModel,
    copula: &CopulaModel,
    n: usize,
    bins: usize,
    seed: u64,
) -> Result<BinnedCost> {
    joint.validate()?;
    copula.validate()?;
    if n < 10_000 {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            domain: "[10000, ∞)",
        });
    }
    if bins < 10 || bins > n / 100 {
        return Err(Error::Domain {
            name: "bins",
            value: bins as f64,
            domain: "[10, n/100]",
        });
    }
    let market = Market::Copula {
        joint: *joint,
        copula: *copula,
    };
    let states = market.simulate(n, seed, Sampling::Iid);
    let partial: Vec<Vec<(usize, f64, f64)>> = states
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = vec![(0usize, 0.0, 0.0); bins];
            for st in chunk {
                let b = ((st.z * bins as f64) as usize).min(bins - 1);
                let slot = &mut acc[b];
                slot.0 += 1;
                slot.1 += st.rho;
                slot.2 += st.rho * st.rho;
            }
            acc
        })
        .collect();
    let mut acc = vec![(0usize, 0.0, 0.0); bins];
    for part in partial {
        for (a, p) in acc.iter_mut().zip(part) {
            a.0 += p.0;
            a.1 += p.1;
            a.2 += p.2;
        }
    }
    if let Some(bin) = acc.iter().position(|a| a.0 == 0) {
        return Err(Error::EmptyBin {
            bin,
            bins,
            suggested: (bins / 2).max(10),
        });
    }
    let stats = acc
        .into_iter()
        .map(|(count, sum, sumsq)| {
            let k = count as f64;
            let mean = sum / k;
            let var = if count > 1 {
                ((sumsq - k * mean * mean) / (k - 1.0)).max(0.0)
            } else {
                0.0
            };
            BinStat {
                count,
                mean,
                stderr: (var / k).sqrt(),
            }
        })
        .collect();
    BinnedCost::from_bins(stats, joint.phi_limit(copula))
}

/// Solves the copula-constrained problem with default search settings.
pub fn solve_with_copula(
    m: &MixedMeasure,
    joint: &JointMarketModel,
    copula: &CopulaModel,
    x: f64,
    mc: &McConfig,
) -> Result<Solution> {
    solve_with_copula_cfg(m, joint, copula, x, mc, &SearchConfig::default())
}

pub fn solve_with_copula_cfg(
    m: &MixedMeasure,
    joint: &JointMarketModel,
    copula: &CopulaModel,
    x: f64,
    mc: &McConfig,
    search: &SearchConfig,
) -> Result<Solution> {
    let binned = phi_estimate(joint, copula, mc.n, mc.bins(), mc.seed)?;
    solve_profile(m, &CostProfile::Binned(binned), x, search)
}

/// Comparison of an empirical copula against a model on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub n: usize,
    pub grid: usize,
    /// `max |Ĉ − C|` over interior grid points.
    pub distance: f64,
    /// Largest `|Ĉ − C| / se` with `se = √(C(1−C)/n)`.
    pub max_z: f64,
    /// Cell counts, `cells[i][j]` for `u ∈ [i/g, (i+1)/g)`, `v ∈ [j/g, (j+1)/g)`.
    pub cells: Vec<Vec<usize>>,
}

/// Compares the empirical copula of `(u, v)` pairs with `copula` on a 10×10 grid.
pub fn verify_dependence(u: &[f64], v: &[f64], copula: &CopulaModel) -> Result<DependenceReport> {
    if u.is_empty() || u.len() != v.len() {
        return Err(Error::EmptySample);
    }
    const G: usize = 10;
    let n = u.len();
    let mut cells = vec![vec![0usize; G]; G];
    for (&a, &b) in u.iter().zip(v) {
        let i = ((a * G as f64) as usize).min(G - 1);
        let j = ((b * G as f64) as usize).min(G - 1);
        cells[i][j] += 1;
    }
    // cumulative counts give the empirical copula at (i/G, j/G)
    let mut cum = vec![vec![0usize; G + 1]; G + 1];
    for i in 0..G {
        for j in 0..G {
            cum[i + 1][j + 1] = cells[i][j] + cum[i][j + 1] + cum[i + 1][j] - cum[i][j];
        }
    }
    let mut distance: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    for i in 1..G {
        for j in 1..G {
            let (gu, gv) = (i as f64 / G as f64, j as f64 / G as f64);
            let model = copula.cdf(gu, gv);
            let emp = cum[i][j] as f64 / n as f64;
            let d = (emp - model).abs();
            let se = (model * (1.0 - model) / n as f64).sqrt();
            distance = distance.max(d);
            max_z = max_z.max(d / se);
        }
    }
    Ok(DependenceReport {
        n,
        grid: G,
        distance,
        max_z,
        cells,
    })
}

/// Kolmogorov–Smirnov statistic of a sample against the uniform law on `[0,1]`.
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let hi = (i + 1) as f64 / n - x;
            let lo = x - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint(kernel: KernelModel, r_m: f64) -> JointMarketModel {
        JointMarketModel::new(kernel, Benchmark { mu: 0.0, sigma: 0.3 }, r_m).unwrap()
    }

    #[test]
    fn independence_reduces_to_kernel_rank() {
        let k = KernelModel::lognormal(0.0, 1.0).unwrap();
        let j = joint(k, 0.0);
        for &(rho, a) in &[(0.3, 0.8), (1.0, 1.0), (4.0, 2.5)] {
            let z = z_transform(&j, &CopulaModel::Independence, rho, a);
            assert!((z - (1.0 - k.cdf(rho))).abs() < 1e-12);
            let g0 = z_transform(&j, &CopulaModel::Gaussian { r: 0.0 }, rho, a);
            assert_eq!(g0, z);
        }
    }

    #[test]
    fn conditional_quantile_inverts() {
        let c = CopulaModel::Gaussian { r: 0.6 };
        for &u in &[0.05, 0.3, 0.7, 0.95] {
            for &v in &[0.1, 0.5, 0.9] {
                assert!((c.cond_quantile(c.cond_cdf(u, v), v) - u).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn copula_cdf_margins() {
        let c = CopulaModel::Gaussian { r: 0.5 };
        assert!((c.cdf(0.3, 1.0) - 0.3).abs() < 1e-12);
        // C(1/2, 1/2) = 1/4 + asin(r)/(2π)
        let expected = 0.25 + 0.5f64.asin() / (2.0 * std::f64::consts::PI);
        assert!((c.cdf(0.5, 0.5) - expected).abs() < 1e-9);
    }

    #[test]
    fn phi_limits() {
        let k = KernelModel::uniform(0.5, 1.5).unwrap();
        assert_eq!(joint(k, 0.0).phi_limit(&CopulaModel::Independence), 0.5);
        // fully aligned scores: b = r_m·r − √(1−r_m²)√(1−r²) > 0
        assert_eq!(joint(k, 0.9).phi_limit(&CopulaModel::Gaussian { r: 0.95 }), 1.5);
    }

    #[test]
    fn phi_exact_matches_lognormal_closed_form_numerically() {
        let j = joint(KernelModel::shifted_exponential(0.0, 1.0).unwrap(), 0.3);
        let c = CopulaModel::Gaussian { r: 0.5 };
        // grand mean: ∫ φ = δ
        let cfg = QuadConfig::default();
        let total = quad::integrate(|z| j.phi_exact(&c, z), 0.0, 1.0, cfg).value;
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn estimate_preconditions() {
        let j = joint(KernelModel::uniform(0.5, 1.5).unwrap(), 0.0);
        let c = CopulaModel::Independence;
        assert!(phi_estimate(&j, &c, 5_000, 10, 1).is_err());
        assert!(phi_estimate(&j, &c, 10_000, 9, 1).is_err());
        assert!(phi_estimate(&j, &c, 10_000, 101, 1).is_err());
        assert!(phi_estimate(&j, &c, 10_000, 100, 1).is_ok());
    }

    #[test]
    fn ks_of_grid_is_small() {
        let s: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!((ks_uniform(&s) - 0.0005).abs() < 1e-12);
    }
}
