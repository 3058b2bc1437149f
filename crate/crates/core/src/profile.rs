//! Tail-cost profiles `κ(c) = ∫_c¹ cost(z) dz`.
//!
//! Two sources: a pricing kernel, where `cost(z) = F_ρ⁻¹(1−z)`, and a binned
//! estimate of the conditional mean `φ` in the copula-constrained market.
//! Everything is parametrised by the pair `(c, s = 1 − c)` so the solver can
//! probe tails far below `f64` resolution near `c = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelModel;

/// A point `c ∈ [0,1]` carried together with `s = 1 − c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub c: f64,
    pub s: f64,
}

impl TailPoint {
    pub fn from_c(c: f64) -> Self {
        Self { c, s: 1.0 - c }
    }

    /// Exact for tiny `s`, where `1 − s` rounds to 1.
    pub fn from_s(s: f64) -> Self {
        Self { c: 1.0 - s, s }
    }
}

/// Summary of one bin of the `φ` estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Piecewise-constant cost built from binned samples.
///
/// Bin `b` occupies `z ∈ [cum_b/n, cum_{b+1}/n]` where `cum_b` counts samples in
/// earlier bins, so `∫ φ̂` reproduces the sample mean exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCost {
    /// `tails[b] = 1 − cum_b/n`, strictly decreasing from 1 to 0.
    tails: Vec<f64>,
    values: Vec<f64>,
    /// `suffix[b] = Σ_{j ≥ b} values[j]·(tails[j] − tails[j+1])`.
    suffix: Vec<f64>,
    #[serde(with = "crate::ext_float")]
    hint: f64,
    stats: Vec<BinStat>,
}

impl BinnedCost {
    /// `stats` in increasing-`z` order; `hint` is `lim_{z→1} φ(z)`.
    pub fn from_bins(stats: Vec<BinStat>, hint: f64) -> Result<Self> {
        if stats.is_empty() {
            return Err(Error::InvalidProfile("no bins".into()));
        }
        if let Some((b, s)) = stats
            .iter()
            .enumerate()
            .find(|(_, s)| s.count == 0 || !(s.mean.is_finite() && s.mean > 0.0))
        {
            return Err(Error::InvalidProfile(format!(
                "bin {b} has count {} and mean {}; bins must be non-empty with positive mean",
                s.count, s.mean
            )));
        }
        if !(hint >= 0.0) {
            return Err(Error::InvalidProfile(format!("limit hint must be >= 0, got {hint}")));
        }
        let n: usize = stats.iter().map(|s| s.count).sum();
        let mut tails = Vec::with_capacity(stats.len() + 1);
        let mut cum = 0usize;
        for s in &stats {
            tails.push((n - cum) as f64 / n as f64);
            cum += s.count;
        }
        tails.push(0.0);
        let values: Vec<f64> = stats.iter().map(|s| s.mean).collect();
        let mut suffix = vec![0.0; values.len() + 1];
        for b in (0..values.len()).rev() {
            suffix[b] = suffix[b + 1] + values[b] * (stats[b].count as f64 / n as f64);
        }
        Ok(Self {
            tails,
            values,
            suffix,
            hint,
            stats,
        })
    }

    pub fn stats(&self) -> &[BinStat] {
        &self.stats
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bin edges in `z`, from 0 to 1.
    pub fn edges(&self) -> Vec<f64> {
        self.tails.iter().map(|t| 1.0 - t).collect()
    }

    /// `φ̂(z)`.
    pub fn value_at(&self, z: f64) -> f64 {
        let s = 1.0 - z;
        let j = self.tails.partition_point(|&t| t > s).clamp(1, self.values.len());
        self.values[j - 1]
    }

    fn tail_cost(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return self.suffix[0];
        }
        if s <= 0.0 {
            return 0.0;
        }
        let j = self.tails.partition_point(|&t| t > s);
        self.suffix[j] + self.values[j - 1] * (s - self.tails[j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CostProfile {
    Kernel(KernelModel),
    Binned(BinnedCost),
}

impl CostProfile {
    /// `δ = κ(0)`.
    pub fn total(&self) -> f64 {
        match self {
            CostProfile::Kernel(k) => k.mean(),
            CostProfile::Binned(b) => b.suffix[0],
        }
    }

    /// `κ` at `c = 1 − s`.
    pub fn tail_cost(&self, s: f64) -> f64 {
        match self {
            CostProfile::Kernel(k) => k.tail_cost(s),
            CostProfile::Binned(b) => b.tail_cost(s),
        }
    }

    pub fn kappa(&self, c: f64) -> f64 {
        self.tail_cost(1.0 - c)
    }

    pub fn kappa_at(&self, p: TailPoint) -> f64 {
        self.tail_cost(p.s)
    }

    /// Limit of the cost as `z → 1`; zero here is what makes `ζ` diverge.
    pub fn lower_bound_hint(&self) -> f64 {
        match self {
            CostProfile::Kernel(k) => k.essinf(),
            CostProfile::Binned(b) => b.hint,
        }
    }

    /// Points in `(0,1)` where `κ` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CostProfile::Kernel(_) => Vec::new(),
            CostProfile::Binned(b) => {
                let e = b.edges();
                e[1..e.len() - 1].to_vec()
            }
        }
    }

    /// Kernel threshold `β = F_ρ⁻¹(1−c)`; undefined for binned profiles.
    pub fn beta_at(&self, p: TailPoint) -> Option<f64> {
        match self {
            CostProfile::Kernel(k) if p.s > 0.0 && p.s < 1.0 => Some(k.quantile_unchecked(p.s)),
            _ => None,
        }
    }

    pub fn kernel(&self) -> Option<&KernelModel> {
        match self {
            CostProfile::Kernel(k) => Some(k),
            CostProfile::Binned(_) => None,
        }
    }

    /// Checks `κ(0) = δ` and that `κ` decreases strictly on a grid.
    pub fn validate(&self) -> Result<()> {
        let delta = self.total();
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidProfile(format!("total cost must be positive, got {delta}")));
        }
        let k0 = self.kappa(0.0);
        if (k0 - delta).abs() > 1e-10 * delta.max(1.0) {
            return Err(Error::InvalidProfile(format!("kappa(0) = {k0} differs from total {delta}")));
        }
        let n = 1000;
        let mut prev = k0;
        for i in 1..=n {
            let k = self.kappa(i as f64 / n as f64);
            if !(k < prev) {
                return Err(Error::InvalidProfile(format!(
                    "kappa is not strictly decreasing near c = {}",
                    i as f64 / n as f64
                )));
            }
            prev = k;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stat(count: usize, mean: f64) -> BinStat {
        BinStat { count, mean, stderr: 0.0 }
    }

    #[test]
    fn binned_integral_reproduces_weighted_mean() {
        let b = BinnedCost::from_bins(vec![stat(3, 2.0), stat(1, 1.0)], 1.0).unwrap();
        let p = CostProfile::Binned(b);
        assert!((p.total() - (3.0 * 2.0 + 1.0) / 4.0).abs() < 1e-15);
        // last bin spans z ∈ [0.75, 1] at height 1
        assert!((p.kappa(0.9) - 0.1).abs() < 1e-15);
        assert!((p.kappa(0.5) - (0.25 + 0.25 * 2.0)).abs() < 1e-15);
        assert_eq!(p.breakpoints(), vec![0.75]);
        p.validate().unwrap();
    }

    #[test]
    fn binned_rejects_empty_bins() {
        assert!(BinnedCost::from_bins(vec![stat(3, 2.0), stat(0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn kernel_profile() {
        let p = CostProfile::Kernel(KernelModel::uniform(0.5, 1.5).unwrap());
        assert!((p.kappa(0.5) - 0.375).abs() < 1e-15);
        assert_eq!(p.lower_bound_hint(), 0.5);
        assert_eq!(p.beta_at(TailPoint::from_c(0.5)), Some(1.0));
        p.validate().unwrap();
    }
}
