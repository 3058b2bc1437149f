//! Independent checks of a solution: direct evaluation of `V`, Monte Carlo
//! budget estimates and a brute-force search over two-level quantile functions
//! `a + k·1{z ≥ c}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{phi_estimate, McConfig};
use crate::error::{Error, Result};
use crate::market::{Market, MarketState, Sampling};
use crate::measure::MixedMeasure;
use crate::profile::{CostProfile, TailPoint};
use crate::rng::ordered_sum;
use crate::solver::{CaseTag, Solution};

/// `V(X) = ∫ F̂_X⁻¹(z) m(dz)` for the empirical law of `sample`, using the
/// right-continuous quantile `F̂⁻¹(z) = x_(⌊zn⌋)`.
pub fn evaluate_v(sample: &[f64], m: &MixedMeasure) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.par_sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    let quantile = |z: f64| {
        let i = (z * n as f64 + 1e-9).floor() as usize;
        xs[i.min(n - 1)]
    };
    let atoms: f64 = m.atoms().iter().map(|a| a.mass * quantile(a.loc)).sum();
    if m.density().is_empty() {
        return Ok(atoms);
    }
    let dens: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x == 0.0 {
                0.0
            } else {
                x * m.density_mass(i as f64 / n as f64, (i + 1) as f64 / n as f64)
            }
        })
        .sum();
    Ok(atoms + dens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// The `c`-grid is `j / c_points` for `j = 1..c_points`.
    pub c_points: usize,
    /// Evenly spaced `a ∈ [0, x/δ]`, endpoints included.
    pub a_points: usize,
    /// Extra points `c = 1 − 2⁻ᵏ`, `k = 1..=tail_depth`.
    pub tail_depth: u32,
    /// Also evaluate at atoms of `m` and kinks of the cost.
    pub include_breakpoints: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            c_points: 10_000,
            a_points: 11,
            tail_depth: 60,
            include_breakpoints: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub a: f64,
    pub k: f64,
    pub c: f64,
    pub s: f64,
    pub value: f64,
    pub c_grid: usize,
    pub a_grid: usize,
}

/// Maximises `a + k·m([c,1])` subject to `a·δ + k·κ(c) ≤ x` over a grid.
pub fn brute_force_oracle(m: &MixedMeasure, cost: &CostProfile, x: f64, cfg: &OracleConfig) -> Result<OracleResult> {
    if cfg.c_points < 100 || cfg.a_points < 2 {
        return Err(Error::Domain {
            name: "grid",
            value: cfg.c_points.min(cfg.a_points) as f64,
            domain: "c_points >= 100 and a_points >= 2",
        });
    }
    let delta = cost.total();
    let mut points: Vec<TailPoint> = (1..cfg.c_points)
        .map(|j| TailPoint::from_c(j as f64 / cfg.c_points as f64))
        .collect();
    points.extend((1..=cfg.tail_depth).map(|k| TailPoint::from_s(0.5f64.powi(k as i32))));
    if cfg.include_breakpoints {
        points.extend(m.breakpoints().into_iter().map(TailPoint::from_c));
        points.extend(cost.breakpoints().into_iter().map(TailPoint::from_c));
    }
    let a_max = x / delta;
    let a_grid: Vec<f64> = (0..cfg.a_points)
        .map(|i| {
            if i + 1 == cfg.a_points {
                a_max
            } else {
                a_max * i as f64 / (cfg.a_points - 1) as f64
            }
        })
        .collect();

    let per_point: Vec<OracleResult> = points
        .par_iter()
        .map(|&p| {
            let tail = m.tail_mass_at(p);
            let kappa = cost.kappa_at(p);
            let mut best = OracleResult {
                a: 0.0,
                k: 0.0,
                c: p.c,
                s: p.s,
                value: f64::NEG_INFINITY,
                c_grid: 0,
                a_grid: 0,
            };
            for &a in &a_grid {
                let k = ((x - a * delta) / kappa).max(0.0);
                let value = a + k * tail;
                if value > best.value {
                    best.a = a;
                    best.k = k;
                    best.value = value;
                }
            }
            best
        })
        .collect();
    let mut best = per_point
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("oracle grid is non-empty");
    best.c_grid = points.len();
    best.a_grid = a_grid.len();
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Monte Carlo estimate of the price `E[ρ·X]` of the payoff `rule`.
///
/// The standard error is the iid formula; under stratified sampling it is conservative.
pub fn mc_feasibility<F>(rule: F, market: &Market, n: usize, seed: u64, sampling: Sampling) -> Result<McEstimate>
where
    F: Fn(&MarketState) -> f64 + Sync,
{
    if n < 2 {
        return Err(Error::EmptySample);
    }
    let states = market.simulate(n, seed, sampling);
    let [sum, sumsq] = ordered_sum(&states, |st| {
        let v = st.rho * rule(st);
        [v, v * v]
    });
    let k = n as f64;
    let mean = sum / k;
    let var = ((sumsq - k * mean * mean) / (k - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / k).sqrt(),
        n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    pub oracle: OracleConfig,
    /// Settings used to rebuild `φ̂` for copula markets.
    pub mc: McConfig,
    /// Simulation size for the budget and value checks.
    pub n: usize,
    pub seed: u64,
    /// Upper bound on `(value − oracle)/value`.
    pub oracle_rel_gap: f64,
    /// Slack, in units of `x`, for the oracle exceeding the solver.
    pub oracle_slack: f64,
    pub budget_sigmas: f64,
    pub value_rel_tol: f64,
    /// Required closeness of the last sequence term to the value (case (iv)).
    pub sequence_rel_tol: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            oracle: OracleConfig::default(),
            mc: McConfig::default(),
            n: 1_000_000,
            seed: 7,
            oracle_rel_gap: 1e-3,
            oracle_slack: 1e-9,
            budget_sigmas: 4.0,
            value_rel_tol: 0.02,
            sequence_rel_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub tolerance: Option<f64>,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
            estimate: None,
            stderr: None,
            tolerance: None,
        }
    }

    fn with(mut self, estimate: f64, stderr: Option<f64>, tolerance: f64) -> Self {
        self.estimate = Some(estimate);
        self.stderr = stderr;
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub passed: bool,
    pub case: CaseTag,
    pub checks: Vec<Check>,
}

impl CertifyReport {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// The digital leg `(c, s, k)` of a solution, with `s = 1 − c` taken from the
/// solution when it is consistent with `c`.
fn digital_leg(sol: &Solution) -> Result<(TailPoint, f64)> {
    match (sol.c_star, sol.k_star) {
        (Some(c), Some(k)) => {
            let s = sol
                .s_star
                .filter(|s| (1.0 - s - c).abs() <= 1e-15)
                .unwrap_or(1.0 - c);
            Ok((TailPoint { c, s }, k))
        }
        _ => Err(Error::UnsupportedCase(sol.case)),
    }
}

/// Runs every applicable check; a failed check never aborts the others.
pub fn certify(sol: &Solution, m: &MixedMeasure, market: &Market, x: f64, cfg: &CertifyConfig) -> Result<CertifyReport> {
    market.validate()?;
    let cost = match market {
        Market::Plain { kernel } => CostProfile::Kernel(*kernel),
        Market::Copula { joint, copula } => {
            CostProfile::Binned(phi_estimate(joint, copula, cfg.mc.n, cfg.mc.bins(), cfg.mc.seed)?)
        }
    };
    let delta = cost.total();
    let mut checks = Vec::new();

    // value identity
    let expected = if sol.gamma_star.is_infinite() {
        f64::INFINITY
    } else {
        (1.0 / delta).max(sol.gamma_star) * x
    };
    let identity_ok = if expected.is_infinite() {
        sol.optimal_value.is_infinite()
    } else {
        rel_close(sol.optimal_value, expected, 1e-12)
    };
    checks.push(Check::new(
        "value_identity",
        identity_ok,
        format!("optimal_value = {}, max(1/delta, gamma*)·x = {}", sol.optimal_value, expected),
    ));

    // parameters
    match sol.case {
        CaseTag::Digital => {
            let (p, k) = digital_leg(sol)?;
            let budget = k * cost.kappa_at(p);
            let mut ok = rel_close(budget, x, 1e-10);
            let mut detail = format!("k*·kappa(c*) = {budget}, x = {x}");
            if let (Some(beta), Some(expected)) = (sol.beta_star, cost.beta_at(p)) {
                ok &= rel_close(beta, expected, 1e-12);
                detail.push_str(&format!("; beta* = {beta}, F^-1(1-c*) = {expected}"));
            }
            checks.push(Check::new("parameters", ok, detail).with(budget, None, 1e-10));
        }
        CaseTag::RiskFree => {
            let payoff = sol.payoff.unwrap_or(f64::NAN);
            let budget = payoff * delta;
            checks.push(
                Check::new("parameters", rel_close(budget, x, 1e-12), format!("payoff·delta = {budget}, x = {x}"))
                    .with(budget, None, 1e-12),
            );
        }
        _ => {}
    }

    // oracle gap
    let oracle = brute_force_oracle(m, &cost, x, &cfg.oracle)?;
    if sol.optimal_value.is_finite() {
        let above = oracle.value <= sol.optimal_value + cfg.oracle_slack * x;
        let gap = (sol.optimal_value - oracle.value) / sol.optimal_value;
        checks.push(
            Check::new(
                "oracle_gap",
                above && gap <= cfg.oracle_rel_gap,
                format!(
                    "oracle = {} at (a, k, c) = ({}, {}, {}), solver = {}, relative gap = {gap:e}",
                    oracle.value, oracle.a, oracle.k, oracle.c, sol.optimal_value
                ),
            )
            .with(oracle.value, None, cfg.oracle_rel_gap),
        );
    } else {
        let last = sol.sequence.last().map_or(f64::INFINITY, |t| t.value);
        checks.push(Check::new(
            "oracle_gap",
            oracle.value >= last * (1.0 - 1e-9),
            format!("oracle = {} reaches the last sequence value {last}", oracle.value),
        ));
    }

    let seed = cfg.seed;
    match sol.case {
        CaseTag::Digital | CaseTag::RiskFree => {
            let rule = |st: &MarketState| payoff_by_rank(sol, st);
            let est = mc_feasibility(rule, market, cfg.n, seed, Sampling::Iid)?;
            let ok = (est.estimate - x).abs() <= cfg.budget_sigmas * est.stderr;
            checks.push(
                Check::new(
                    "mc_budget",
                    ok,
                    format!(
                        "E[rho·X] = {} ± {}, x = {x}, allowed {} standard errors",
                        est.estimate, est.stderr, cfg.budget_sigmas
                    ),
                )
                .with(est.estimate, Some(est.stderr), cfg.budget_sigmas),
            );

            let states = market.simulate(cfg.n, seed.wrapping_add(1), Sampling::Stratified);
            let sample: Vec<f64> = states.par_iter().map(|st| payoff_by_rank(sol, st)).collect();
            let v = evaluate_v(&sample, m)?;
            let ok = rel_close(v, sol.optimal_value, cfg.value_rel_tol);
            checks.push(
                Check::new(
                    "value",
                    ok,
                    format!("V(X*) from simulation = {v}, optimal_value = {}", sol.optimal_value),
                )
                .with(v, None, cfg.value_rel_tol),
            );
        }
        CaseTag::Infinite | CaseTag::Unattained => {
            let mut worst: Option<(u32, f64, f64)> = None;
            for t in &sol.sequence {
                let p = TailPoint { c: t.c, s: t.s };
                let rule = |st: &MarketState| if st.z_tail <= p.s { t.k } else { 0.0 };
                let est = mc_feasibility(rule, market, cfg.n, seed.wrapping_add(t.n as u64), Sampling::Iid)?;
                let excess = (est.estimate - x) / est.stderr.max(f64::MIN_POSITIVE);
                if est.estimate > x + cfg.budget_sigmas * est.stderr
                    && worst.is_none_or(|(_, e, _)| excess > e)
                {
                    worst = Some((t.n, excess, est.estimate));
                }
            }
            checks.push(Check::new(
                "mc_budget",
                worst.is_none(),
                match worst {
                    None => format!(
                        "all {} sequence payoffs cost at most x + {} standard errors",
                        sol.sequence.len(),
                        cfg.budget_sigmas
                    ),
                    Some((n, e, est)) => format!("term {n} costs {est} ({e:.1} standard errors above x)"),
                },
            ));

            let values: Vec<f64> = sol.sequence.iter().map(|t| t.value).collect();
            let increasing = !values.is_empty() && values.windows(2).all(|w| w[1] > w[0]);
            let bounded = values.iter().all(|&v| v <= sol.optimal_value * (1.0 + 1e-9));
            let mut ok = increasing && bounded;
            let mut detail = format!("sequence values strictly increasing: {increasing}, bounded by optimal value: {bounded}");
            if sol.case == CaseTag::Unattained {
                let last = *values.last().unwrap_or(&0.0);
                let close = rel_close(last, sol.optimal_value, cfg.sequence_rel_tol);
                ok &= close;
                detail.push_str(&format!("; last value {last} vs optimal {}", sol.optimal_value));
            }
            checks.push(Check::new("value", ok, detail));
        }
    }

    Ok(CertifyReport {
        passed: checks.iter().all(|c| c.passed),
        case: sol.case,
        checks,
    })
}

fn payoff_by_rank(sol: &Solution, st: &MarketState) -> f64 {
    match sol.case {
        CaseTag::RiskFree => sol.payoff.unwrap_or(sol.wealth / sol.delta),
        CaseTag::Digital => match digital_leg(sol) {
            Ok((p, k)) => {
                if st.z_tail <= p.s {
                    k
                } else {
                    0.0
                }
            }
            Err(_) => f64::NAN,
        },
        _ => f64::NAN,
    }
}
