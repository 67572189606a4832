//! Distribution samplers beyond what `rand_distr` exposes directly.
//!
//! The centerpiece is the exact squared-Bessel transition: a BESQ(δ) value
//! propagated over any time step by the noncentral chi-square construction,
//! together with the closed-form probability that the path visits 0 inside
//! the step (needed for boundary-touch detection in the diffusion backends).

use rand_core::RngCore;
use rand_distr::{Beta, Distribution, Gamma, Poisson};
use thiserror::Error;

use crate::special::reg_upper_gamma;

/// Errors from the sampler constructors.
#[derive(Debug, Error)]
pub enum DistError {
    #[error("beta shape parameters must be positive and finite, got ({0}, {1})")]
    BadBetaShape(f64, f64),
    #[error("squared Bessel step requires x ≥ 0, dim > 0, dt > 0, got (x={0}, dim={1}, dt={2})")]
    BadBesqArguments(f64, f64, f64),
}

/// Draws one Beta(a, b) variate, guaranteed inside the open interval (0, 1).
///
/// Used most often with (a, b) = (1/3, 2/3), whose density
/// (√3/2π)·s^{-2/3}(1−s)^{-1/3} is the generalized arcsine law that governs
/// the position of the last record before a fixed time. Draws that round to
/// exactly 0 or 1 (possible for shapes < 1 at f64 resolution) are rejected
/// and redrawn, because every consumer feeds the value into log/log1p.
pub fn sample_beta(rng: &mut impl RngCore, a: f64, b: f64) -> Result<f64, DistError> {
    let beta = Beta::new(a, b).map_err(|_| DistError::BadBetaShape(a, b))?;
    loop {
        let s = beta.sample(rng);
        if s > 0.0 && s < 1.0 {
            return Ok(s);
        }
    }
}

/// Advances a squared Bessel process of dimension `dim` from value `x` over
/// a time step `dt`, exactly in law.
///
/// The transition is `X_{dt} ~ dt · χ'²_dim(x/dt)`: a noncentral chi-square
/// realized as a Poisson(x/(2·dt)) mixture of Gamma(dim/2 + N, scale 2)
/// variates. Mean is `x + dim·dt` and the output is nonnegative by
/// construction, including from `x = 0` (the boundary is entrance/reflecting
/// for 0 < dim < 2).
pub fn besq_step(rng: &mut impl RngCore, x: f64, dim: f64, dt: f64) -> Result<f64, DistError> {
    if !(x >= 0.0) || !(dim > 0.0) || !(dt > 0.0) || !x.is_finite() || !dt.is_finite() {
        return Err(DistError::BadBesqArguments(x, dim, dt));
    }
    let lambda = x / (2.0 * dt);
    let mixture_n = if lambda > 0.0 {
        let poisson = Poisson::new(lambda).expect("lambda is positive and finite");
        poisson.sample(rng)
    } else {
        0.0
    };
    let shape = 0.5 * dim + mixture_n;
    let gamma = Gamma::new(shape, 2.0).expect("shape and scale are positive");
    Ok(dt * gamma.sample(rng))
}

/// Probability that a squared Bessel path of dimension `dim ∈ (0, 2)`
/// started at `x ≥ 0` visits 0 at some time in `[0, s]`.
///
/// The first passage time to 0 is distributed as `x / (2Γ)` with
/// `Γ ~ Gamma(1 − dim/2)`, hence the probability equals the regularized
/// upper incomplete gamma function Q(1 − dim/2, x/(2s)).
pub fn besq_first_passage_prob(x: f64, dim: f64, s: f64) -> f64 {
    debug_assert!(dim > 0.0 && dim < 2.0);
    if x <= 0.0 {
        return 1.0;
    }
    if s <= 0.0 {
        return 0.0;
    }
    reg_upper_gamma(1.0 - 0.5 * dim, x / (2.0 * s))
}

/// Probability that a squared Bessel path of dimension `dim ∈ (0, 2)` does
/// NOT visit 0 on `[0, s]`, given both endpoints `x0` and `x1`.
///
/// This is the ratio of the killed-at-0 transition density to the
/// (instantaneously reflecting) free one. Both are Bessel-I expressions
/// with the same argument η = √(x0·x1)/s and opposite orders ±ν where
/// ν = dim/2 − 1 ∈ (−1, 0), so the ratio is
///
/// ```text
/// P(no visit | endpoints) = I_{−ν}(η) / I_ν(η) = (η/2)^{−2ν} S_{−ν}/S_ν,
/// ```
///
/// with S_ν the order-ν power series Σ_m (η²/4)^m / (m! Γ(m+ν+1)). At
/// dimension 1 (where W = B² for a reflected Brownian motion) this
/// collapses to tanh(η), the reflection-principle answer.
///
/// Conditioning on both endpoints is what makes sequential detection
/// unbiased: deciding each substep from the start value alone ignores that
/// surviving paths end systematically higher, and first hits then fire
/// early.
pub fn besq_bridge_no_touch_prob(x0: f64, x1: f64, dim: f64, s: f64) -> f64 {
    debug_assert!(dim > 0.0 && dim < 2.0);
    if x0 <= 0.0 || x1 <= 0.0 {
        return 0.0;
    }
    if s <= 0.0 {
        return 1.0;
    }
    let nu = 0.5 * dim - 1.0;
    let eta = (x0 * x1).sqrt() / s;
    // The visit probability is ~e^{−2η}; past η = 40 it is below 1e-34 and
    // the series terms (which peak near e^η) would start flirting with f64
    // overflow around η ≈ 700 anyway.
    if eta > 40.0 {
        return 1.0;
    }
    let ratio = bessel_i_series(-nu, eta) / bessel_i_series(nu, eta);
    ((0.5 * eta).powf(-2.0 * nu) * ratio).min(1.0)
}

/// The even part S_ν(η) = Σ_m (η²/4)^m / (m! Γ(m+ν+1)) of the modified
/// Bessel function: I_ν(η) = (η/2)^ν S_ν(η). All terms are positive for
/// ν > −1, so the sum is stable; callers keep η ≤ 40.
fn bessel_i_series(nu: f64, eta: f64) -> f64 {
    let q = 0.25 * eta * eta;
    let mut term = (-crate::special::ln_gamma(1.0 + nu)).exp();
    let mut sum = term;
    let mut m = 0.0f64;
    while m < 500.0 {
        term *= q / ((m + 1.0) * (m + 1.0 + nu));
        sum += term;
        m += 1.0;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
