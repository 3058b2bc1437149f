//! Optimal payoffs for preferences of the form `V(X) = ∫ F_X⁻¹(z) m(dz)` in a
//! single-period complete market.
//!
//! The optimum (when it exists) is a digital option `k*·1{ρ ≤ β*}`. Which of the
//! four regimes applies is decided by the supremum `γ*` of the tail ratio
//!
//! ```text
//! ζ(c) = m([c,1]) / ∫_c¹ cost(z) dz
//! ```
//!
//! where `cost(z)` is either the pricing-kernel quantile `F_ρ⁻¹(1−z)` or, when the
//! payoff must follow a given copula with a benchmark, the conditional mean
//! `φ(z) = E[ρ | Z = z]`.
//!
//! Module map:
//!
//! - [`measure`]: the distortion measure `m` (atoms plus polynomial density).
//! - [`kernel`]: parametric pricing kernels with closed-form tail costs.
//! - [`profile`]: the tail-cost abstraction shared by both market settings.
//! - [`solver`]: `ζ`, the `γ*` search, classification and payoff construction.
//! - [`copula`]: the copula-constrained market, `Z`, and the `φ` estimator.
//! - [`market`] and [`verify`]: simulation, brute-force oracle and certification.

pub mod copula;
pub mod error;
pub mod kernel;
pub mod market;
pub mod measure;
pub mod normal;
pub mod profile;
pub mod quad;
pub mod solver;
pub mod verify;

mod ext_float;
mod golden;
mod rng;

pub use copula::{
    phi_estimate, solve_with_copula, verify_dependence, z_transform, Benchmark, CopulaModel,
    JointMarketModel, McConfig,
};
pub use error::{Error, Result};
pub use kernel::{KernelModel, KernelSpec};
pub use market::{Market, MarketState, Sampling};
pub use measure::{Atom, DensityPiece, MeasureSpec, MixedMeasure, Violation};
pub use profile::{BinnedCost, CostProfile, TailPoint};
pub use solver::{
    corollary_quantile, gamma_star, payoff_value, solve, solve_profile, zeta, CaseTag, GammaStar,
    SearchConfig, Solution, SupSource,
};
pub use verify::{brute_force_oracle, certify, evaluate_v, mc_feasibility, CertifyConfig, OracleConfig};
