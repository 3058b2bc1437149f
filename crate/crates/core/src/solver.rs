//! The `γ*` search, case classification and payoff construction.
//!
//! `ζ(c) = m([c,1]) / κ(c)` is upper semicontinuous on `(0,1)` with at most
//! upward jumps (at atoms of `m`). Its limit at `c → 0` is `(1 − m({0}))/δ` and
//! its limit at `c → 1` is `g(1)/κ'(1)` where `g(1)` is the density of `m` at 1
//! and `κ'(1)` the cost at `z = 1` (the essential infimum of `ρ`). An atom at 1
//! forces divergence. So the supremum is either attained at an interior point or
//! approached as `c → 1`, and the search concentrates on those two regions.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::golden::golden_max;
use crate::kernel::KernelModel;
use crate::measure::MixedMeasure;
use crate::profile::{CostProfile, TailPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    /// `γ* = ∞`.
    Infinite,
    /// `γ* ≤ 1/δ`: hold the risk-free payoff `x/δ`.
    #[serde(rename = "riskfree")]
    RiskFree,
    /// Supremum attained: digital payoff.
    Digital,
    /// Finite supremum above `1/δ` that is never attained.
    Unattained,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::Infinite => "infinite",
            CaseTag::RiskFree => "riskfree",
            CaseTag::Digital => "digital",
            CaseTag::Unattained => "unattained",
        })
    }
}

/// Where the supremum of `ζ` was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupSource {
    /// Attained at a point with `1 − c` above the tail region.
    Interior,
    /// Attained at a point inside the tail region near `c = 1`.
    Tail,
    /// Approached as `c → 1`, not attained.
    UpperLimit,
    /// Approached as `c → 0`; then `γ* ≤ 1/δ`.
    LowerLimit,
    /// `ζ` is unbounded.
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Number of Chebyshev nodes on `(0,1)`.
    pub grid_size: usize,
    /// Probes at `1 − c = 2⁻ᵏ` for `k = 1..=depth`.
    pub tail_probe_depth: u32,
    /// `ζ` above `divergence_cap / δ` on a probe counts as divergence.
    pub divergence_cap: f64,
    /// Relative gap under which a candidate is taken to attain the supremum.
    pub attain_tol: f64,
    /// Band around `γ*·δ = 1` reported as inconclusive.
    pub boundary_tol: f64,
    /// Points with `1 − c` below this are "tail" points.
    pub tail_region: f64,
    /// Relative tolerance for treating two `ζ` values as tied.
    pub tie_tol: f64,
    /// At most this many grid local maxima are refined.
    pub refine_top: usize,
    /// Only local maxima within this relative distance of the best are refined.
    pub refine_window: f64,
    pub sequence_len: u32,
    /// Size of the downsampled `(c, ζ)` grid kept for plotting.
    pub diagnostic_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_size: 10_000,
            tail_probe_depth: 60,
            divergence_cap: 1e12,
            attain_tol: 1e-9,
            boundary_tol: 1e-9,
            tail_region: 1e-6,
            tie_tol: 2e-15,
            refine_top: 64,
            refine_window: 1e-3,
            sequence_len: 20,
            diagnostic_points: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaPoint {
    pub c: f64,
    pub s: f64,
    #[serde(with = "crate::ext_float")]
    pub zeta: f64,
}

/// Result of the supremum search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaStar {
    #[serde(with = "crate::ext_float")]
    pub value: f64,
    pub attained: bool,
    pub c_star: Option<f64>,
    /// `1 − c*`, kept separately because it may be far below `f64` resolution at 1.
    pub s_star: Option<f64>,
    pub source: SupSource,
    /// `lim_{c→0} ζ(c)`.
    pub lower_limit: f64,
    /// `lim_{c→1} ζ(c)` when finite.
    #[serde(with = "crate::ext_float")]
    pub upper_limit: f64,
    /// Downsampled search grid.
    pub grid: Vec<ZetaPoint>,
    pub probes: Vec<ZetaPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTerm {
    pub n: u32,
    pub c: f64,
    pub s: f64,
    pub k: f64,
    pub beta: Option<f64>,
    /// `k·m([c,1])`, the preference value of `k·1{Z ≥ c}`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub source: SupSource,
    pub lower_limit: f64,
    #[serde(with = "crate::ext_float")]
    pub upper_limit: f64,
    pub grid: Vec<ZetaPoint>,
    pub probes: Vec<ZetaPoint>,
}

/// A classified solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub case: CaseTag,
    #[serde(with = "crate::ext_float")]
    pub gamma_star: f64,
    #[serde(with = "crate::ext_float")]
    pub optimal_value: f64,
    pub attained: bool,
    pub delta: f64,
    pub wealth: f64,
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default)]
    pub s_star: Option<f64>,
    #[serde(default)]
    pub beta_star: Option<f64>,
    #[serde(default)]
    pub k_star: Option<f64>,
    /// Constant payoff of the risk-free case.
    #[serde(default)]
    pub payoff: Option<f64>,
    #[serde(default)]
    pub sequence: Vec<SequenceTerm>,
    pub diagnostics: Diagnostics,
}

impl Solution {
    /// Payoff as a function of the rank variable `Z` (`1 − F_ρ(ρ)` without a copula).
    pub fn payoff_at_rank(&self, z: f64) -> Result<f64> {
        match self.case {
            CaseTag::RiskFree => Ok(self.payoff.unwrap_or(self.wealth / self.delta)),
            CaseTag::Digital => {
                let (c, k) = self.digital_parameters()?;
                Ok(if z >= c { k } else { 0.0 })
            }
            other => Err(Error::UnsupportedCase(other)),
        }
    }

    fn digital_parameters(&self) -> Result<(f64, f64)> {
        match (self.c_star, self.k_star) {
            (Some(c), Some(k)) => Ok((c, k)),
            _ => Err(Error::InvalidProfile("digital solution lacks c_star or k_star".into())),
        }
    }
}

fn check_wealth(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "x",
            value: x,
            domain: "(0, ∞)",
        })
    }
}

fn zeta_at(m: &MixedMeasure, cost: &CostProfile, p: TailPoint) -> f64 {
    let tail = m.tail_mass_at(p);
    if tail <= 0.0 {
        return 0.0;
    }
    let k = cost.kappa_at(p);
    if k <= 0.0 {
        f64::INFINITY
    } else {
        tail / k
    }
}

/// `ζ(c) = m([c,1]) / κ(c)` for `c ∈ (0,1)`.
pub fn zeta(m: &MixedMeasure, cost: &CostProfile, c: f64) -> Result<f64> {
    check_open_unit("c", c)?;
    Ok(zeta_at(m, cost, TailPoint::from_c(c)))
}

#[derive(Clone, Copy)]
struct Cand {
    p: TailPoint,
    zeta: f64,
    /// Atom or breakpoint, as opposed to a grid or refined point.
    exact: bool,
}

fn chebyshev(n: usize) -> Vec<TailPoint> {
    (0..n)
        .map(|j| {
            let theta = (2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
            let (sin, cos) = (0.5 * theta).sin_cos();
            TailPoint { c: sin * sin, s: cos * cos }
        })
        .collect()
}

fn divergent(m: &MixedMeasure, cost: &CostProfile, probes: Vec<ZetaPoint>) -> GammaStar {
    let lower_limit = (1.0 - m.mass_at_zero()) / cost.total();
    GammaStar {
        value: f64::INFINITY,
        attained: false,
        c_star: None,
        s_star: None,
        source: SupSource::Divergent,
        lower_limit,
        upper_limit: f64::INFINITY,
        grid: Vec::new(),
        probes,
    }
}

fn downsample(points: &[Cand], target: usize) -> Vec<ZetaPoint> {
    let step = (points.len() / target.max(1)).max(1);
    points
        .iter()
        .step_by(step)
        .map(|c| ZetaPoint { c: c.p.c, s: c.p.s, zeta: c.zeta })
        .collect()
}

/// `γ* = sup_{c∈(0,1)} ζ(c)`.
pub fn gamma_star(m: &MixedMeasure, cost: &CostProfile, cfg: &SearchConfig) -> Result<GammaStar> {
    let delta = cost.total();
    let probes: Vec<ZetaPoint> = (1..=cfg.tail_probe_depth)
        .map(|k| {
            let p = TailPoint::from_s(0.5f64.powi(k as i32));
            ZetaPoint { c: p.c, s: p.s, zeta: zeta_at(m, cost, p) }
        })
        .collect();

    let hint = cost.lower_bound_hint();
    let g1 = m.density_at_one();
    if m.mass_at_one() > 0.0 || (hint == 0.0 && g1 > 0.0) {
        return Ok(divergent(m, cost, probes));
    }
    let cap = cfg.divergence_cap / delta;
    if probes.iter().any(|p| p.zeta > cap) {
        return Ok(divergent(m, cost, probes));
    }

    // exact points: atoms of m and kinks of either side
    let mut exact: Vec<f64> = m.breakpoints();
    exact.extend(cost.breakpoints());
    exact.sort_by(f64::total_cmp);
    exact.dedup();

    let mut grid: Vec<Cand> = chebyshev(cfg.grid_size)
        .into_par_iter()
        .map(|p| Cand { p, zeta: zeta_at(m, cost, p), exact: false })
        .collect();
    grid.sort_by(|a, b| a.p.c.total_cmp(&b.p.c));
    let mut cands: Vec<Cand> = exact
        .iter()
        .map(|&c| {
            let p = TailPoint::from_c(c);
            Cand { p, zeta: zeta_at(m, cost, p), exact: true }
        })
        .collect();
    cands.extend(probes.iter().map(|z| Cand {
        p: TailPoint { c: z.c, s: z.s },
        zeta: z.zeta,
        exact: false,
    }));

    let all_best = grid.iter().chain(&cands).map(|c| c.zeta).fold(f64::NEG_INFINITY, f64::max);
    if grid.iter().chain(&cands).any(|c| c.zeta.is_nan()) {
        return Err(Error::InconclusiveSearch {
            lower: all_best.max(0.0),
            upper: f64::INFINITY,
        });
    }
    if grid.iter().chain(&cands).any(|c| c.zeta > cap) {
        return Ok(divergent(m, cost, probes));
    }

    // refine grid local maxima inside their smooth segment
    let mut local: Vec<usize> = (0..grid.len())
        .filter(|&j| {
            let z = grid[j].zeta;
            let left = j == 0 || grid[j - 1].zeta <= z;
            let right = j + 1 == grid.len() || grid[j + 1].zeta <= z;
            left && right && z > 0.0 && z >= all_best * (1.0 - cfg.refine_window)
        })
        .collect();
    local.sort_by(|&a, &b| grid[b].zeta.total_cmp(&grid[a].zeta).then(a.cmp(&b)));
    local.truncate(cfg.refine_top);
    let refined: Vec<Cand> = local
        .par_iter()
        .map(|&j| refine(m, cost, &grid, j, &exact))
        .collect();
    cands.extend(refined);
    cands.extend(grid.iter().copied());

    let lower_limit = (1.0 - m.mass_at_zero()) / delta;
    let upper_limit = if hint > 0.0 {
        g1 / hint
    } else {
        // 0/0: fall back on the deepest probes
        let n = probes.len();
        let (a, b) = (probes[n - 2].zeta, probes[n - 1].zeta);
        if (b - a).abs() <= 1e-6 * b.abs().max(1.0 / delta) {
            b
        } else {
            return Err(Error::InconclusiveSearch {
                lower: all_best.max(b),
                upper: f64::INFINITY,
            });
        }
    };

    let (interior, tail): (Vec<Cand>, Vec<Cand>) =
        cands.iter().partition(|c| c.exact || c.p.s >= cfg.tail_region);
    let best_of = |v: &[Cand]| v.iter().map(|c| c.zeta).fold(0.0, f64::max);
    let interior_best = best_of(&interior);
    let tail_best = best_of(&tail);
    let sup = interior_best.max(tail_best).max(upper_limit).max(lower_limit);

    let grid_diag = downsample(&grid, cfg.diagnostic_points);
    let base = GammaStar {
        value: sup,
        attained: false,
        c_star: None,
        s_star: None,
        source: SupSource::UpperLimit,
        lower_limit,
        upper_limit,
        grid: grid_diag,
        probes,
    };

    // points refined towards c = 0 reproduce the limit up to rounding
    if lower_limit >= interior_best.max(tail_best).max(upper_limit) * (1.0 - cfg.tie_tol) {
        return Ok(GammaStar {
            value: lower_limit,
            source: SupSource::LowerLimit,
            ..base
        });
    }
    let pick = |set: &[Cand], source: SupSource| {
        let best = best_of(set);
        let arg = select_argmax(set, best, cfg.tie_tol);
        GammaStar {
            value: arg.zeta,
            attained: true,
            c_star: Some(arg.p.c),
            s_star: Some(arg.p.s),
            source,
            ..base.clone()
        }
    };
    if interior_best >= sup * (1.0 - cfg.attain_tol) {
        return Ok(pick(&interior, SupSource::Interior));
    }
    if tail_best >= sup * (1.0 - cfg.attain_tol) && tail_best > upper_limit * (1.0 + cfg.attain_tol) {
        return Ok(pick(&tail, SupSource::Tail));
    }
    // the limit is the supremum; tail values within the band are rounding noise
    Ok(GammaStar {
        value: upper_limit.max(tail_best),
        ..base
    })
}

/// Smallest `c` among the (near-)maximisers, preferring an exact point that
/// sits immediately to its right.
fn select_argmax(set: &[Cand], best: f64, tie_tol: f64) -> Cand {
    let floor = best * (1.0 - tie_tol);
    let mut ties: Vec<&Cand> = set.iter().filter(|c| c.zeta >= floor).collect();
    ties.sort_by(|a, b| a.p.c.total_cmp(&b.p.c).then(b.exact.cmp(&a.exact)));
    let first = *ties[0];
    if first.exact {
        return first;
    }
    ties.iter()
        .find(|c| c.exact && c.p.c >= first.p.c && c.p.c - first.p.c <= 1e-9)
        .map(|c| **c)
        .unwrap_or(first)
}

fn refine(m: &MixedMeasure, cost: &CostProfile, grid: &[Cand], j: usize, exact: &[f64]) -> Cand {
    let c = grid[j].p.c;
    let mut lo = if j == 0 { 0.0 } else { grid[j - 1].p.c };
    let mut hi = if j + 1 == grid.len() { 1.0 } else { grid[j + 1].p.c };
    // clip to the smooth segment around c
    let k = exact.partition_point(|&e| e < c);
    if k > 0 {
        lo = lo.max(exact[k - 1]);
    }
    if k < exact.len() {
        hi = hi.min(exact[k]);
    }
    let (p, zeta) = if lo >= 0.5 {
        let s_hi = if j == 0 { 1.0 - lo } else { grid[j - 1].p.s.min(1.0 - lo) };
        let s_lo = if j + 1 == grid.len() { 0.0 } else { grid[j + 1].p.s.max(1.0 - hi) };
        let (s, z) = golden_max(|s| zeta_at(m, cost, TailPoint::from_s(s)), s_lo, s_hi, 120);
        (TailPoint::from_s(s), z)
    } else {
        let (c, z) = golden_max(|c| zeta_at(m, cost, TailPoint::from_c(c)), lo, hi, 120);
        (TailPoint::from_c(c), z)
    };
    let own = grid[j];
    if zeta > own.zeta {
        Cand { p, zeta, exact: false }
    } else {
        own
    }
}

/// Solves with the pricing kernel as the cost.
pub fn solve(m: &MixedMeasure, kernel: &KernelModel, x: f64) -> Result<Solution> {
    solve_with(m, kernel, x, &SearchConfig::default())
}

pub fn solve_with(m: &MixedMeasure, kernel: &KernelModel, x: f64, cfg: &SearchConfig) -> Result<Solution> {
    solve_profile(m, &CostProfile::Kernel(*kernel), x, cfg)
}

/// Generic engine shared by the plain and copula-constrained markets.
pub fn solve_profile(m: &MixedMeasure, cost: &CostProfile, x: f64, cfg: &SearchConfig) -> Result<Solution> {
    check_wealth(x)?;
    let delta = cost.total();
    let gs = gamma_star(m, cost, cfg)?;
    let diagnostics = Diagnostics {
        source: gs.source,
        lower_limit: gs.lower_limit,
        upper_limit: gs.upper_limit,
        grid: gs.grid.clone(),
        probes: gs.probes.clone(),
    };
    let mut sol = Solution {
        case: CaseTag::RiskFree,
        gamma_star: gs.value,
        optimal_value: f64::NAN,
        attained: gs.attained,
        delta,
        wealth: x,
        c_star: None,
        s_star: None,
        beta_star: None,
        k_star: None,
        payoff: None,
        sequence: Vec::new(),
        diagnostics,
    };

    if gs.source == SupSource::Divergent {
        sol.case = CaseTag::Infinite;
        sol.optimal_value = f64::INFINITY;
        sol.sequence = sequence(m, cost, x, cfg.sequence_len);
        return Ok(sol);
    }

    let scaled = gs.value * delta;
    let positive_case = if gs.attained { CaseTag::Digital } else { CaseTag::Unattained };
    if gs.source != SupSource::LowerLimit && (scaled - 1.0).abs() < cfg.boundary_tol {
        return Err(Error::InconclusiveCase {
            gamma_star: gs.value,
            delta,
            scaled,
            band: cfg.boundary_tol,
            candidates: [CaseTag::RiskFree, positive_case],
        });
    }
    if scaled <= 1.0 {
        sol.case = CaseTag::RiskFree;
        sol.attained = true;
        sol.optimal_value = x / delta;
        sol.payoff = Some(x / delta);
        return Ok(sol);
    }
    sol.case = positive_case;
    sol.optimal_value = gs.value * x;
    if gs.attained {
        let p = TailPoint {
            c: gs.c_star.expect("attained supremum carries c*"),
            s: gs.s_star.expect("attained supremum carries s*"),
        };
        sol.c_star = Some(p.c);
        sol.s_star = Some(p.s);
        sol.beta_star = cost.beta_at(p);
        sol.k_star = Some(x / cost.kappa_at(p));
    } else {
        sol.sequence = sequence(m, cost, x, cfg.sequence_len);
    }
    Ok(sol)
}

/// `X_n = k_n·1{Z ≥ c_n}` with `c_n = 1 − 2⁻ⁿ` and the budget binding.
fn sequence(m: &MixedMeasure, cost: &CostProfile, x: f64, len: u32) -> Vec<SequenceTerm> {
    (1..=len)
        .map(|n| {
            let p = TailPoint::from_s(0.5f64.powi(n as i32));
            let k = x / cost.kappa_at(p);
            SequenceTerm {
                n,
                c: p.c,
                s: p.s,
                k,
                beta: cost.beta_at(p),
                value: k * m.tail_mass_at(p),
            }
        })
        .collect()
}

/// Evaluates the optimal payoff at a realisation of `ρ`.
pub fn payoff_value(sol: &Solution, rho: f64) -> Result<f64> {
    match sol.case {
        CaseTag::RiskFree => Ok(sol.payoff.unwrap_or(sol.wealth / sol.delta)),
        CaseTag::Digital => {
            let beta = sol.beta_star.ok_or_else(|| {
                Error::InvalidMarket("payoff depends on the rank Z, not on rho alone; use payoff_at_rank".into())
            })?;
            let k = sol.k_star.ok_or(Error::UnsupportedCase(sol.case))?;
            Ok(if rho <= beta { k } else { 0.0 })
        }
        other => Err(Error::UnsupportedCase(other)),
    }
}

/// Quantile maximisation: `m` is the point mass at `alpha`.
pub fn corollary_quantile(alpha: f64, kernel: &KernelModel, x: f64) -> Result<Solution> {
    check_open_unit("alpha", alpha)?;
    solve(&MixedMeasure::dirac(alpha)?, kernel, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, DensityPiece};

    fn unif_kernel() -> KernelModel {
        KernelModel::uniform(0.5, 1.5).unwrap()
    }

    #[test]
    fn zeta_examples() {
        let m = MixedMeasure::dirac(0.5).unwrap();
        let cost = CostProfile::Kernel(unif_kernel());
        assert!((zeta(&m, &cost, 0.5).unwrap() - 1.0 / 0.375).abs() < 1e-12);
        assert_eq!(zeta(&m, &cost, 0.6).unwrap(), 0.0);
        let u = MixedMeasure::uniform();
        let cost = CostProfile::Kernel(KernelModel::uniform(1.0, 2.0).unwrap());
        assert!((zeta(&u, &cost, 0.5).unwrap() - 0.8).abs() < 1e-12);
        assert!(zeta(&u, &cost, 0.0).is_err());
        assert!(zeta(&u, &cost, 1.0).is_err());
    }

    #[test]
    fn canonical_cases() {
        let ln = KernelModel::lognormal(0.0, 1.0).unwrap();
        let s = solve(&MixedMeasure::uniform(), &ln, 1.0).unwrap();
        assert_eq!(s.case, CaseTag::Infinite);
        assert_eq!(s.gamma_star, f64::INFINITY);

        let s = solve(&MixedMeasure::dirac(0.0).unwrap(), &ln, 2.0).unwrap();
        assert_eq!(s.case, CaseTag::RiskFree);
        assert!((s.payoff.unwrap() - 2.0 / ln.mean()).abs() < 1e-15);

        let s = solve(&MixedMeasure::dirac(0.5).unwrap(), &unif_kernel(), 1.0).unwrap();
        assert_eq!(s.case, CaseTag::Digital);
        assert_eq!(s.c_star, Some(0.5));
        assert_eq!(s.beta_star, Some(1.0));
        assert!((s.k_star.unwrap() - 1.0 / 0.375).abs() < 1e-12);

        let s = solve(&MixedMeasure::uniform(), &KernelModel::uniform(1.0, 2.0).unwrap(), 1.0).unwrap();
        assert_eq!(s.case, CaseTag::Unattained);
        assert!(!s.attained);
        assert!((s.gamma_star - 1.0).abs() < 1e-6);
        assert_eq!(s.sequence.len(), 20);
    }

    #[test]
    fn payoff_examples() {
        let s = solve(&MixedMeasure::dirac(0.5).unwrap(), &unif_kernel(), 1.0).unwrap();
        assert!((payoff_value(&s, 0.8).unwrap() - 2.6666666666666665).abs() < 1e-12);
        assert_eq!(payoff_value(&s, 1.2).unwrap(), 0.0);
        let rf = solve(&MixedMeasure::dirac(0.0).unwrap(), &KernelModel::uniform(0.5, 1.5).unwrap(), 2.0).unwrap();
        assert_eq!(payoff_value(&rf, 17.0).unwrap(), 2.0);
        let inf = solve(&MixedMeasure::uniform(), &KernelModel::lognormal(0.0, 1.0).unwrap(), 1.0).unwrap();
        assert!(matches!(payoff_value(&inf, 1.0), Err(Error::UnsupportedCase(CaseTag::Infinite))));
    }

    #[test]
    fn atom_at_one_diverges() {
        let m = MixedMeasure::new(
            vec![Atom { loc: 1.0, mass: 0.1 }],
            vec![DensityPiece { lo: 0.0, hi: 1.0, coef: vec![0.9] }],
        )
        .unwrap();
        let s = solve(&m, &unif_kernel(), 1.0).unwrap();
        assert_eq!(s.case, CaseTag::Infinite);
    }

    #[test]
    fn interior_smooth_maximum_is_refined() {
        // density 1−z plus an atom at 0.3
        let m = MixedMeasure::new(
            vec![Atom { loc: 0.3, mass: 0.5 }],
            vec![DensityPiece { lo: 0.0, hi: 1.0, coef: vec![1.0, -1.0] }],
        )
        .unwrap();
        let k = KernelModel::lognormal(0.0, 0.5).unwrap();
        let s = solve(&m, &k, 1.0).unwrap();
        let cost = CostProfile::Kernel(k);
        // dense check of the reported supremum
        let dense = (1..200_000)
            .map(|i| zeta(&m, &cost, i as f64 / 200_000.0).unwrap())
            .fold(0.0, f64::max);
        assert!(s.gamma_star >= dense * (1.0 - 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let s = solve(&MixedMeasure::uniform(), &KernelModel::lognormal(0.0, 1.0).unwrap(), 1.0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""case":"infinite""#));
        assert!(text.contains(r#""gamma_star":"inf""#));
        let back: Solution = serde_json::from_str(&text).unwrap();
        assert_eq!(back.case, CaseTag::Infinite);
    }
}
