//! Parametric pricing kernels `ρ`: positive, atomless, integrable.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::normal;
use crate::quad::{self, QuadConfig};
use crate::rng::par_generate;

/// Wire form of a kernel; validated into a [`KernelModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `ρ = exp(mu + sigma·W)` with `W` standard normal.
    Lognormal { mu: f64, sigma: f64 },
    /// `ρ` uniform on `[a, b]`, `0 ≤ a < b`.
    Uniform { a: f64, b: f64 },
    /// `ρ = shift + E/rate` with `E` standard exponential.
    ShiftedExponential { shift: f64, rate: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidKernel(msg));
        match *self {
            KernelSpec::Lognormal { mu, sigma } => {
                if !mu.is_finite() {
                    return bad(format!("lognormal mu must be finite, got {mu}"));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return bad(format!("lognormal sigma must be positive, got {sigma}"));
                }
            }
            KernelSpec::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return bad(format!("uniform bounds must be finite, got [{a}, {b}]"));
                }
                if a < 0.0 {
                    return bad(format!("uniform lower bound must be >= 0, got {a}"));
                }
                if b <= a {
                    return bad(format!("uniform requires b > a, got [{a}, {b}]"));
                }
            }
            KernelSpec::ShiftedExponential { shift, rate } => {
                if !(shift.is_finite() && shift >= 0.0) {
                    return bad(format!("shifted exponential shift must be >= 0, got {shift}"));
                }
                if !(rate.is_finite() && rate > 0.0) {
                    return bad(format!("shifted exponential rate must be positive, got {rate}"));
                }
            }
        }
        Ok(())
    }
}

/// A validated pricing-kernel distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct KernelModel {
    spec: KernelSpec,
}

impl TryFrom<KernelSpec> for KernelModel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }
}

impl From<KernelModel> for KernelSpec {
    fn from(k: KernelModel) -> Self {
        k.spec
    }
}

impl KernelModel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        spec.try_into()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(KernelSpec::Lognormal { mu, sigma })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(KernelSpec::Uniform { a, b })
    }

    pub fn shifted_exponential(shift: f64, rate: f64) -> Result<Self> {
        Self::new(KernelSpec::ShiftedExponential { shift, rate })
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    /// `δ = E[ρ]`.
    pub fn mean(&self) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            KernelSpec::Uniform { a, b } => 0.5 * (a + b),
            KernelSpec::ShiftedExponential { shift, rate } => shift + 1.0 / rate,
        }
    }

    pub fn essinf(&self) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { .. } => 0.0,
            KernelSpec::Uniform { a, .. } => a,
            KernelSpec::ShiftedExponential { shift, .. } => shift,
        }
    }

    pub fn esssup(&self) -> f64 {
        match self.spec {
            KernelSpec::Uniform { b, .. } => b,
            _ => f64::INFINITY,
        }
    }

    /// `P(ρ ≤ r)`.
    pub fn cdf(&self, r: f64) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => {
                if r <= 0.0 {
                    0.0
                } else {
                    normal::cdf((r.ln() - mu) / sigma)
                }
            }
            KernelSpec::Uniform { a, b } => ((r - a) / (b - a)).clamp(0.0, 1.0),
            KernelSpec::ShiftedExponential { shift, rate } => {
                if r <= shift {
                    0.0
                } else {
                    -(-rate * (r - shift)).exp_m1()
                }
            }
        }
    }

    /// `P(ρ > r)`, accurate in the upper tail.
    pub fn sf(&self, r: f64) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => {
                if r <= 0.0 {
                    1.0
                } else {
                    normal::cdf(-(r.ln() - mu) / sigma)
                }
            }
            KernelSpec::Uniform { a, b } => ((b - r) / (b - a)).clamp(0.0, 1.0),
            KernelSpec::ShiftedExponential { shift, rate } => {
                if r <= shift {
                    1.0
                } else {
                    (-rate * (r - shift)).exp()
                }
            }
        }
    }

    /// `F_ρ⁻¹(p)` for `p ∈ (0,1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_open_unit("p", p)?;
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => (mu + sigma * normal::inv_cdf(p)).exp(),
            KernelSpec::Uniform { a, b } => a + (b - a) * p,
            KernelSpec::ShiftedExponential { shift, rate } => shift - (-p).ln_1p() / rate,
        }
    }

    /// `F_ρ⁻¹(Φ(w))`, computed without forming `Φ(w)` where that loses precision.
    pub fn quantile_of_normal(&self, w: f64) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => (mu + sigma * w).exp(),
            KernelSpec::Uniform { a, b } => a + (b - a) * normal::cdf(w),
            KernelSpec::ShiftedExponential { shift, rate } => {
                let e = if w < 0.0 {
                    -(-normal::cdf(w)).ln_1p()
                } else {
                    -normal::cdf(-w).ln()
                };
                shift + e / rate
            }
        }
    }

    /// `Φ⁻¹(F_ρ(r))`.
    pub fn normal_score(&self, r: f64) -> f64 {
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => {
                if r <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (r.ln() - mu) / sigma
                }
            }
            _ => {
                let p = self.cdf(r);
                if p <= 0.5 {
                    normal::inv_cdf(p)
                } else {
                    -normal::inv_cdf(self.sf(r))
                }
            }
        }
    }

    /// `E[ρ·1{ρ ≤ F_ρ⁻¹(s)}] = ∫_0^s F_ρ⁻¹(u) du` for `s ∈ [0,1]`.
    ///
    /// Parametrised by the lower-tail probability `s` so that tiny values keep
    /// full relative precision.
    pub fn tail_cost(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return self.mean();
        }
        match self.spec {
            KernelSpec::Lognormal { mu, sigma } => {
                (mu + 0.5 * sigma * sigma).exp() * normal::cdf(normal::inv_cdf(s) - sigma)
            }
            KernelSpec::Uniform { a, b } => a * s + 0.5 * (b - a) * s * s,
            KernelSpec::ShiftedExponential { shift, rate } => {
                shift * s + exp_truncated_mean(s) / rate
            }
        }
    }

    /// `κ(c) = ∫_c¹ F_ρ⁻¹(1−z) dz` for `c ∈ [0,1)`.
    pub fn partial_expectation(&self, c: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::Domain {
                name: "c",
                value: c,
                domain: "[0, 1)",
            });
        }
        Ok(self.tail_cost(1.0 - c))
    }

    /// Adaptive-quadrature evaluation of [`Self::tail_cost`]; a cross-check only.
    pub fn tail_cost_by_quadrature(&self, s: f64) -> f64 {
        let cfg = QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 5000,
        };
        quad::integrate(|u| self.quantile_unchecked(u), 0.0, s, cfg).value
    }

    /// `n` independent draws by inverse transform. Deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        par_generate(n, seed, |rng, _| {
            let u: f64 = rng.sample(Open01);
            self.quantile_unchecked(u)
        })
    }
}

/// `E[E·1{E ≤ −ln(1−s)}] = s + (1−s)·ln(1−s)` for a standard exponential `E`.
fn exp_truncated_mean(s: f64) -> f64 {
    if s < 0.1 {
        // Σ_{j≥2} s^j / (j(j−1)) avoids the cancellation near zero
        let mut term = s;
        let mut sum = 0.0;
        for j in 2..200 {
            term *= s;
            let add = term / (j * (j - 1)) as f64;
            sum += add;
            if add < sum * 1e-17 {
                break;
            }
        }
        sum
    } else {
        s + (1.0 - s) * (-s).ln_1p()
    }
}
