//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints its verdict line; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use dtc_core::copula::{ks_critical_1pct, ks_uniform, solve_with_copula};
use dtc_core::{
    brute_force_oracle, corollary_quantile, evaluate_v, mc_feasibility, solve, Benchmark, CaseTag, CopulaModel,
    CostProfile, Error, JointMarketModel, KernelModel, Market, McConfig, MixedMeasure, OracleConfig, Sampling,
    Solution,
};

// criterion 1
const INSTANCES: usize = 200;
const ORACLE_SLACK: f64 = 1e-9;
const ORACLE_REL_GAP: f64 = 1e-3;
// criterion 2
const QUANTILE_PAIRS: usize = 50;
const BUDGET_TOL: f64 = 1e-10;
// criterion 3
const UNATTAINED_TOL: f64 = 1e-6;
// criterion 5
const MC_N: usize = 1_000_000;
const SIGMAS: f64 = 4.0;
const V_REL_TOL: f64 = 0.02;
// criterion 6
const COPULA_BINS: usize = 100;
const COPULA_REL_TOL: f64 = 0.02;
const KS_RS: [f64; 4] = [-0.8, 0.0, 0.5, 0.9];
// criterion 7
const LEFT_EPS: f64 = 0.05;
const LEFT_INSTANCES: usize = 50;
// criterion 8
const SEQ_LEN: usize = 20;
const SEQ_REL_TOL: f64 = 0.01;

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

struct Canon {
    infinite: (MixedMeasure, KernelModel),
    riskfree: (MixedMeasure, KernelModel),
    digital: (MixedMeasure, KernelModel),
    unattained: (MixedMeasure, KernelModel),
}

fn canon() -> Canon {
    Canon {
        infinite: (MixedMeasure::uniform(), KernelModel::lognormal(0.0, 1.0).unwrap()),
        riskfree: (MixedMeasure::dirac(0.0).unwrap(), KernelModel::uniform(0.5, 1.5).unwrap()),
        digital: (MixedMeasure::dirac(0.5).unwrap(), KernelModel::uniform(0.5, 1.5).unwrap()),
        unattained: (MixedMeasure::uniform(), KernelModel::uniform(1.0, 2.0).unwrap()),
    }
}

struct Instance {
    m: MixedMeasure,
    kernel: KernelModel,
    x: f64,
    sol: Result<Solution, Error>,
}

fn instances() -> Vec<Instance> {
    let mut rng = common::rng(SEED);
    (0..INSTANCES)
        .map(|_| {
            let m = common::random_measure(&mut rng, 0.0);
            let kernel = common::random_kernel(&mut rng);
            let x = rand::Rng::random_range(&mut rng, 0.1..10.0);
            let sol = solve(&m, &kernel, x);
            Instance { m, kernel, x, sol }
        })
        .collect()
}

fn criterion_1(inst: &[Instance]) -> Verdict {
    let oracle_cfg = OracleConfig::default();
    let (mut checked, mut infinite, mut failures) = (0, 0, Vec::new());
    let mut worst_gap: f64 = 0.0;
    for (i, it) in inst.iter().enumerate() {
        let sol = match &it.sol {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("#{i}: {e}"));
                continue;
            }
        };
        let cost = CostProfile::Kernel(it.kernel);
        let oracle = brute_force_oracle(&it.m, &cost, it.x, &oracle_cfg).unwrap();
        if sol.case == CaseTag::Infinite {
            infinite += 1;
            // nothing to bracket; the oracle must at least exceed every finite bound it can see
            if !(oracle.value > it.x / sol.delta) {
                failures.push(format!("#{i}: infinite case but oracle {} <= x/delta", oracle.value));
            }
            continue;
        }
        checked += 1;
        let v = sol.optimal_value;
        let gap = (v - oracle.value) / v;
        worst_gap = worst_gap.max(gap);
        if oracle.value > v + ORACLE_SLACK * it.x || gap > ORACLE_REL_GAP {
            failures.push(format!("#{i}: {} oracle {} vs solver {v}", sol.case, oracle.value));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{checked} finite instances bracketed (worst relative gap {worst_gap:.2e}), {infinite} infinite{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = common::rng(SEED + 2);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..QUANTILE_PAIRS {
        let alpha = rand::Rng::random_range(&mut rng, 0.01..0.99);
        let kernel = common::random_kernel(&mut rng);
        let x = rand::Rng::random_range(&mut rng, 0.1..10.0);
        match corollary_quantile(alpha, &kernel, x) {
            Ok(s) => {
                let beta = kernel.quantile(1.0 - alpha).unwrap();
                let kappa = kernel.partial_expectation(alpha).unwrap();
                let resid = (s.k_star.unwrap_or(f64::NAN) * kappa - x).abs() / x;
                worst = worst.max(resid);
                if s.case != CaseTag::Digital || s.beta_star != Some(beta) || s.c_star != Some(alpha) || !(resid <= BUDGET_TOL) {
                    failures.push(format!("#{i} alpha={alpha}: {} beta*={:?} vs {beta}", s.case, s.beta_star));
                }
            }
            Err(e) => failures.push(format!("#{i} alpha={alpha}: {e}")),
        }
    }
    verdict(
        failures.is_empty(),
        format!("{QUANTILE_PAIRS} pairs, worst budget residual {worst:.1e}{}", tail(&failures)),
    )
}

fn tail(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", failures.join(", "))
    }
}

fn criterion_3(c: &Canon) -> Verdict {
    let mut failures = Vec::new();
    let cases = [
        ("i", &c.infinite, CaseTag::Infinite),
        ("ii", &c.riskfree, CaseTag::RiskFree),
        ("iii", &c.digital, CaseTag::Digital),
        ("iv", &c.unattained, CaseTag::Unattained),
    ];
    let mut tags = Vec::new();
    for (name, (m, k), want) in cases {
        match solve(m, k, 1.0) {
            Ok(s) => {
                tags.push(format!("({name}) {}", s.case));
                if s.case != want {
                    failures.push(format!("({name}) got {}", s.case));
                }
                if want == CaseTag::Unattained && (s.attained || (s.gamma_star - 1.0).abs() > UNATTAINED_TOL) {
                    failures.push(format!("(iv) gamma* = {}, attained = {}", s.gamma_star, s.attained));
                }
            }
            Err(e) => failures.push(format!("({name}) {e}")),
        }
    }
    verdict(failures.is_empty(), format!("{}{}", tags.join(", "), tail(&failures)))
}

fn criterion_4(inst: &[Instance]) -> Verdict {
    let mut n = 0;
    let mut failures = Vec::new();
    for (i, it) in inst.iter().enumerate() {
        let Ok(s) = &it.sol else { continue };
        if s.case != CaseTag::Digital {
            continue;
        }
        n += 1;
        match solve(&it.m, &it.kernel, 2.0 * it.x) {
            Ok(d) => {
                let same = d.case == s.case && d.c_star == s.c_star && d.beta_star == s.beta_star;
                let doubled = d.k_star.zip(s.k_star).is_some_and(|(a, b)| a == 2.0 * b)
                    && d.optimal_value == 2.0 * s.optimal_value;
                if !(same && doubled) {
                    failures.push(format!("#{i}"));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    verdict(
        failures.is_empty() && n > 0,
        format!("{n} digital instances re-solved at 2x{}", tail(&failures)),
    )
}

fn criterion_5(c: &Canon) -> Verdict {
    let (m, k) = &c.digital;
    let x = 1.0;
    let s = solve(m, k, x).unwrap();
    let market = Market::plain(*k);
    let rule = |st: &dtc_core::MarketState| dtc_core::payoff_value(&s, st.rho).unwrap();
    let est = mc_feasibility(rule, &market, MC_N, SEED + 5, Sampling::Iid).unwrap();
    let budget_ok = (est.estimate - x).abs() <= SIGMAS * est.stderr;
    let sample: Vec<f64> = market
        .simulate(MC_N, SEED + 6, Sampling::Stratified)
        .iter()
        .map(|st| dtc_core::payoff_value(&s, st.rho).unwrap())
        .collect();
    let v = evaluate_v(&sample, m).unwrap();
    let target = s.gamma_star * x;
    let v_ok = (v - target).abs() <= V_REL_TOL * target;
    verdict(
        budget_ok && v_ok,
        format!(
            "E[rho X*] = {:.5} ± {:.5} (|dev| = {:.2} se), V(X*) = {v:.5} vs gamma*·x = {target:.5}",
            est.estimate,
            est.stderr,
            (est.estimate - x).abs() / est.stderr
        ),
    )
}

fn criterion_6(c: &Canon) -> Verdict {
    let bench = Benchmark { mu: 0.0, sigma: 0.25 };
    let mc = McConfig {
        n: MC_N,
        bins: Some(COPULA_BINS),
        seed: SEED + 7,
    };
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (name, (m, k)) in [
        ("i", &c.infinite),
        ("ii", &c.riskfree),
        ("iii", &c.digital),
        ("iv", &c.unattained),
    ] {
        let plain = solve(m, k, 1.0).unwrap();
        let joint = JointMarketModel::new(*k, bench, 0.0).unwrap();
        match solve_with_copula(m, &joint, &CopulaModel::Independence, 1.0, &mc) {
            Ok(cop) => {
                let (a, b) = (cop.gamma_star, plain.gamma_star);
                let rel = if a == b { 0.0 } else { (a - b).abs() / b };
                lines.push(format!("({name}) {} rel {rel:.1e}", cop.case));
                if cop.case != plain.case || !(rel <= COPULA_REL_TOL) {
                    failures.push(format!("({name}) {} vs {}, gamma {a} vs {b}", cop.case, plain.case));
                }
            }
            Err(e) => failures.push(format!("({name}) {e}")),
        }
    }
    let joint = JointMarketModel::new(KernelModel::lognormal(0.0, 1.0).unwrap(), bench, 0.3).unwrap();
    let crit = ks_critical_1pct(MC_N);
    for (i, r) in KS_RS.into_iter().enumerate() {
        let market = Market::Copula {
            joint,
            copula: CopulaModel::Gaussian { r },
        };
        let z: Vec<f64> = market
            .simulate(MC_N, SEED + 100 + i as u64, Sampling::Iid)
            .iter()
            .map(|s| s.z)
            .collect();
        let d = ks_uniform(&z);
        lines.push(format!("KS(r={r}) {:.2}x crit", d / crit));
        if d >= crit {
            failures.push(format!("KS r={r}: D = {d:.2e} >= {crit:.2e}"));
        }
    }
    verdict(failures.is_empty(), format!("{}{}", lines.join(", "), tail(&failures)))
}

fn criterion_7() -> Verdict {
    let mut rng = common::rng(SEED + 8);
    let mut failures = Vec::new();
    let mut tally = std::collections::BTreeMap::new();
    for i in 0..LEFT_INSTANCES {
        let m = common::random_measure(&mut rng, LEFT_EPS);
        assert!((m.tail_mass(LEFT_EPS).unwrap() - 1.0).abs() < 1e-12, "generator leaks mass below eps");
        let kernel = common::random_kernel(&mut rng);
        let x = rand::Rng::random_range(&mut rng, 0.1..10.0);
        match solve(&m, &kernel, x) {
            Ok(s) => {
                *tally.entry(s.case.to_string()).or_insert(0) += 1;
                if s.case == CaseTag::RiskFree {
                    failures.push(format!("#{i}"));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    verdict(failures.is_empty(), format!("cases {tally:?}{}", tail(&failures)))
}

fn criterion_8(c: &Canon) -> Verdict {
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (name, (m, k)) in [("i", &c.infinite), ("iv", &c.unattained)] {
        let x = 1.0;
        let s = solve(m, k, x).unwrap();
        let market = Market::plain(*k);
        if s.sequence.len() != SEQ_LEN {
            failures.push(format!("({name}) sequence has {} terms", s.sequence.len()));
            continue;
        }
        let mut over = 0;
        for t in &s.sequence {
            let rule = |st: &dtc_core::MarketState| if st.rho <= t.beta.unwrap() { t.k } else { 0.0 };
            let est = mc_feasibility(rule, &market, MC_N, SEED + 200 + t.n as u64, Sampling::Iid).unwrap();
            if est.estimate > x + SIGMAS * est.stderr {
                over += 1;
            }
        }
        let values: Vec<f64> = s.sequence.iter().map(|t| t.value).collect();
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let last = *values.last().unwrap();
        let converged = match s.case {
            CaseTag::Unattained => (last - s.optimal_value).abs() <= SEQ_REL_TOL * s.optimal_value,
            _ => true,
        };
        lines.push(format!(
            "({name}) values {:.4} -> {:.4}, {over} over budget",
            values[0], last
        ));
        if over > 0 || !increasing || !converged {
            failures.push(format!("({name}) increasing={increasing} converged={converged} over={over}"));
        }
    }
    verdict(failures.is_empty(), format!("{}{}", lines.join("; "), tail(&failures)))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let start = Instant::now();
    let c = canon();
    let inst = instances();
    let mut results = Vec::new();
    let mut run = |n: usize, title: &str, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        println!(
            "criterion {n} [{}] {title} ({:.1}s): {}",
            if v.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
        results.push(v.passed);
    };
    run(1, "value identity vs oracle", &|| criterion_1(&inst));
    run(2, "quantile closed form", &criterion_2);
    run(3, "canonical case coverage", &|| criterion_3(&c));
    run(4, "wealth scaling", &|| criterion_4(&inst));
    run(5, "Monte Carlo consistency", &|| criterion_5(&c));
    run(6, "copula reduction and Z uniformity", &|| criterion_6(&c));
    run(7, "left-tail criterion", &criterion_7);
    run(8, "approximating sequences", &|| criterion_8(&c));
    let all = results.iter().all(|&p| p);
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.iter().filter(|&&p| p).count(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !all {
        std::process::exit(1);
    }
}
