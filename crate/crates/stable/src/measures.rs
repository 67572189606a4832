//! Densities and reference laws for the record-gap cascade.
//!
//! A *gap* is the log-ratio of two consecutive record depths, so every
//! density here is supported on (0, ∞). The module holds
//!
//! * the transition density `kernel_density` of the gap chain,
//! * its invariant probability density [`varpi_density`] with the exact
//!   sampler [`sample_varpi`],
//! * the excursion intensity [`nu_density`] with its closed-form tail, and
//! * the reference law [`sample_xi_one`] of the first record overshoot
//!   ratio, used by the cross-checks against the discrete walks.
//!
//! All closed forms are evaluated through `exp(−·)` / `expm1` / `ln1p`
//! factors so they stay accurate from gaps of 10⁻⁸ up to several hundred,
//! where the naive `eˣ` forms would overflow.

use std::f64::consts::PI;
use std::sync::OnceLock;

use peelab_numerics::rng::open01;
use peelab_numerics::special::ln_beta;
use peelab_numerics::{integrate, integrate_to_inf, sample_beta, QuadError};
use rand_core::RngCore;

/// Quadrature tolerance for the self-check integrals; the gates they feed
/// sit at 10⁻⁶..10⁻⁸, so three extra digits of headroom are kept here.
const QUAD_TOL: f64 = 1e-11;

/// Where half-line integrals are split: a finite tanh–sinh panel [0, 1]
/// absorbs the endpoint singularities, an exp–sinh panel [1, ∞) the decay.
const SPLIT: f64 = 1.0;

/// Mean gap under the invariant density, π/√3 ≈ 1.8137993642.
///
/// This is the almost-sure growth rate of the log record depth per chain
/// step, and the denominator of the commuting-rate constant.
pub fn invariant_mean_gap() -> f64 {
    PI / f64::sqrt(3.0)
}

/// Transition density p(x, y) of the gap chain: the law of the next gap
/// given that the current gap is `x`. Supported on y > 0 for every x > 0.
///
/// Closed form (√3/2π) · ((eˣ−1)/(eˣ(e^y−1)))^{1/3} / (1 − e^{−x−y}),
/// evaluated in underflow-safe factors. It is reversible with respect to
/// the invariant density: ϖ(x)p(x, y) = ϖ(y)p(y, x) — visible here because
/// ϖ(x)p(x, y) ∝ e^{−(x+y)/3}((1−e^{−x})(1−e^{−y}))^{−1/3}/(1−e^{−x−y})
/// is symmetric in (x, y).
pub fn kernel_density(x: f64, y: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "gap kernel needs x > 0, got {x}");
    assert!(y > 0.0 && y.is_finite(), "gap kernel needs y > 0, got {y}");
    let qx = -(-x).exp_m1(); // 1 − e^{−x}
    let qy = -(-y).exp_m1();
    let qxy = -(-(x + y)).exp_m1();
    let front = f64::sqrt(3.0) / (2.0 * PI);
    front * qx.cbrt() * (-y / 3.0).exp() / (qy.cbrt() * qxy)
}

/// 1/B(1/3, 1/3): normalizer of the invariant density. By the Legendre
/// duplication formula this equals 2^{2/3}√π / (Γ(1/3)Γ(1/6)), the
/// reciprocal of the boundary-measure constant used by the diffusion side;
/// the Beta form is the better-conditioned one to evaluate.
fn varpi_normalizer() -> f64 {
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| (-ln_beta(1.0 / 3.0, 1.0 / 3.0)).exp())
}

/// Invariant probability density of the gap chain,
/// ϖ(x) = eˣ / (eˣ(eˣ−1))^{2/3} / B(1/3, 1/3) on (0, ∞).
///
/// It has an integrable x^{−2/3} singularity at 0 and decays like e^{−x/3}.
pub fn varpi_density(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "invariant density needs x > 0, got {x}");
    varpi_normalizer() * (-x / 3.0).exp() * (-(-x).exp_m1()).powf(-2.0 / 3.0)
}

/// Exact draw from the invariant density: if P ~ Beta(1/3, 1/3) then
/// X = −ln(1 − P) has density ϖ (the map pulls the two Beta endpoint
/// singularities to 0 and ∞ respectively).
pub fn sample_varpi(rng: &mut impl RngCore) -> f64 {
    let p = sample_beta(rng, 1.0 / 3.0, 1.0 / 3.0).expect("fixed valid shapes");
    -(-p).ln_1p()
}

/// Excursion-intensity density ν(x) = eˣ/(eˣ−1)^{4/3} on (0, ∞) — the
/// unnormalized intensity of record-depth log-increments.
pub fn nu_density(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "excursion density needs x > 0, got {x}");
    (-x / 3.0).exp() * (-(-x).exp_m1()).powf(-4.0 / 3.0)
}

/// Closed-form tail of the excursion intensity: ∫ₓ^∞ ν = 3/(eˣ−1)^{1/3}.
pub fn nu_tail(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "excursion tail needs x > 0, got {x}");
    3.0 * (-x / 3.0).exp() * (-(-x).exp_m1()).powf(-1.0 / 3.0)
}

/// Draw from the limit law of the first record ratio ξ(1) ≥ 1: with
/// G ~ Beta(1/3, 2/3) the last regeneration time before 1 and an
/// independent index-1/3 overshoot factor V^{−3} (V uniform),
/// ξ = G + (1 − G)·V^{−3}.
pub fn sample_xi_one(rng: &mut impl RngCore) -> f64 {
    let g = sample_beta(rng, 1.0 / 3.0, 2.0 / 3.0).expect("fixed valid shapes");
    let v = open01(rng);
    g + (1.0 - g) / (v * v * v)
}

/// ∫₀^∞ f, split so the tanh–sinh panel owns the possible singularity at 0
/// and the exp–sinh panel the exponential tail.
fn integral_on_half_line(f: impl Fn(f64) -> f64) -> Result<f64, QuadError> {
    Ok(integrate(&f, 0.0, SPLIT, QUAD_TOL)? + integrate_to_inf(&f, SPLIT, QUAD_TOL)?)
}

/// |∫₀^∞ p(x, y) dy − 1|: the kernel must be a probability density in its
/// second argument for every x.
pub fn kernel_mass_defect(x: f64) -> Result<f64, QuadError> {
    Ok((integral_on_half_line(|y| kernel_density(x, y))? - 1.0).abs())
}

/// |∫₀^∞ ϖ − 1|.
pub fn varpi_mass_defect() -> Result<f64, QuadError> {
    Ok((integral_on_half_line(varpi_density)? - 1.0).abs())
}

/// |∫₀^∞ x·ϖ(x) dx − π/√3|.
pub fn varpi_mean_defect() -> Result<f64, QuadError> {
    let mean = integral_on_half_line(|x| x * varpi_density(x))?;
    Ok((mean - invariant_mean_gap()).abs())
}

/// |∫₀^∞ ϖ(x) p(x, y) dx − ϖ(y)|: stationarity of ϖ under one chain step.
pub fn invariance_residual(y: f64) -> Result<f64, QuadError> {
    let pushed = integral_on_half_line(|x| varpi_density(x) * kernel_density(x, y))?;
    Ok((pushed - varpi_density(y)).abs())
}

/// Relative defect of detailed balance at the pair (x, y):
/// |ϖ(x)p(x,y) − ϖ(y)p(y,x)| / max(both). Algebraically zero; anything
/// beyond rounding noise means the two density implementations disagree.
pub fn reversibility_residual(x: f64, y: f64) -> f64 {
    let fwd = varpi_density(x) * kernel_density(x, y);
    let bwd = varpi_density(y) * kernel_density(y, x);
    (fwd - bwd).abs() / fwd.max(bwd)
}

/// |∫ₓ^∞ ν − nu_tail(x)|: the closed-form tail against direct quadrature.
pub fn nu_tail_defect(x: f64) -> Result<f64, QuadError> {
    Ok((integrate_to_inf(nu_density, x, QUAD_TOL)? - nu_tail(x)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use peelab_numerics::ks::ks_distance_density;
    use peelab_numerics::rng::derive_stream;

    #[test]
    fn kernel_is_a_probability_density_in_its_second_argument() {
        for x in [0.1, 1.0, 5.0] {
            let defect = kernel_mass_defect(x).unwrap();
            assert!(defect < 1e-8, "mass defect {defect} at x = {x}");
        }
    }

    #[test]
    fn kernel_concentrates_when_the_current_gap_is_small() {
        // A short gap means the last record barely cleared its predecessor,
        // which makes another short gap likely: from x = 0.01 more than half
        // of the next-gap mass sits below 0.1.
        let mass = integrate(|y| kernel_density(0.01, y), 0.0, 0.1, QUAD_TOL).unwrap();
        assert!(mass > 0.5, "small-gap mass {mass}");
    }

    #[test]
    fn detailed_balance_holds_to_rounding_noise() {
        assert!(reversibility_residual(0.7, 2.3) < 1e-12);
        let mut rng = derive_stream(30, 0);
        for _ in 0..100 {
            let x = 0.05 + 3.0 * open01(&mut rng);
            let y = 0.05 + 3.0 * open01(&mut rng);
            let r = reversibility_residual(x, y);
            assert!(r < 1e-10, "residual {r} at ({x}, {y})");
        }
    }

    #[test]
    fn invariant_density_normalizes_and_has_the_right_mean() {
        let mass = varpi_mass_defect().unwrap();
        assert!(mass < 1e-8, "mass defect {mass}");
        let mean = varpi_mean_defect().unwrap();
        assert!(mean < 1e-7, "mean defect {mean}");
    }

    #[test]
    fn invariant_density_is_stationary_for_the_kernel() {
        for y in [0.5, 1.0, 3.0] {
            let r = invariance_residual(y).unwrap();
            assert!(r < 1e-7, "invariance residual {r} at y = {y}");
        }
    }

    #[test]
    fn excursion_tail_matches_its_density() {
        for x in [0.1, 1.0, 5.0] {
            let defect = nu_tail_defect(x).unwrap();
            assert!(defect < 1e-8, "tail defect {defect} at x = {x}");
        }
    }

    #[test]
    fn invariant_sampler_matches_the_density() {
        let mut rng = derive_stream(30, 1);
        let sample: Vec<f64> = (0..1_000_000).map(|_| sample_varpi(&mut rng)).collect();
        let d = ks_distance_density(&sample, varpi_density, 0.0, 2_000).unwrap();
        // KS noise floor at n = 10⁶ is ≈ 1.3·10⁻³; a wrong Beta shape or a
        // wrong log map lands at 10⁻¹.
        assert!(d < 0.005, "KS distance {d}");
    }

    #[test]
    fn invariant_sampler_occupation_fractions_match_quadrature() {
        let mut rng = derive_stream(30, 2);
        let n = 1_000_000usize;
        let sample: Vec<f64> = (0..n).map(|_| sample_varpi(&mut rng)).collect();
        for b in [0.5, 2.0] {
            let p = integrate_to_inf(varpi_density, b, QUAD_TOL).unwrap();
            let frac = sample.iter().filter(|&&x| x >= b).count() as f64 / n as f64;
            // Independent draws, so the binomial error applies; 4σ guards
            // against seed luck while real defects overshoot by 30σ+.
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (frac - p).abs() < 4.0 * sigma,
                "occupation {frac} vs {p} (σ = {sigma}) at b = {b}"
            );
        }
    }

    #[test]
    fn first_record_ratio_tail_matches_exact_quadrature() {
        // P(ξ > m) = E[((1−G)/(m−G))^{1/3}] exactly, by integrating the
        // uniform overshoot factor out of ξ = G + (1−G)V^{−3}.
        let m = 1_000.0;
        let beta_norm = (-ln_beta(1.0 / 3.0, 2.0 / 3.0)).exp();
        let exact = integrate(
            |g| {
                let dens = beta_norm * g.powf(-2.0 / 3.0) * (1.0 - g).powf(-1.0 / 3.0);
                ((1.0 - g) / (m - g)).cbrt() * dens
            },
            0.0,
            1.0,
            1e-10,
        )
        .unwrap();

        let mut rng = derive_stream(30, 3);
        let n = 1_000_000usize;
        let mut hits = 0usize;
        let mut below_one = 0usize;
        for _ in 0..n {
            let xi = sample_xi_one(&mut rng);
            if xi < 1.0 {
                below_one += 1;
            }
            if xi > m {
                hits += 1;
            }
        }
        assert_eq!(below_one, 0, "record ratio must be ≥ 1");
        let frac = hits as f64 / n as f64;
        let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (frac - exact).abs() < 4.0 * sigma,
            "tail {frac} vs exact {exact} (σ = {sigma})"
        );
    }
}
