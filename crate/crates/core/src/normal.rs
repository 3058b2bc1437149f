//! Standard normal CDF and quantile.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

/// `Φ(x)`, accurate in both tails.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `Φ⁻¹(p)`; returns `±∞` at the endpoints.
#[inline]
pub fn inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -inv_cdf(1.0 - p);
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step; the series inverse is only good to about 1e-10
    let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    if density <= 0.0 || !x.is_finite() {
        return x;
    }
    let u = (cdf(x) - p) / density;
    x - u / (1.0 + 0.5 * x * u)
}
