//! Closed-form laws of the normalized interface position.
//!
//! The log-time backend evolves a coordinate Z ∈ [0, 1]: the left hull
//! spread as a fraction of the total spread. Its stationary law ρ, its
//! scale function φ, and the visit rate ∫ ρ(x)/(x(1−x)) dx = 7 are all
//! explicit, which makes them the deterministic anchors for every Monte
//! Carlo estimate the diffusion backends produce.
//!
//! Everything here reduces to Beta/Gamma evaluations plus quadrature, and
//! the two routes are kept deliberately separate so they can be played
//! against each other in tests: the closed forms come from `special`, the
//! integrals from the double-exponential quadrature.

use std::sync::OnceLock;

use peelab_numerics::quad::{integrate, QuadError};
use peelab_numerics::sample_beta;
use peelab_numerics::special::{beta, ln_beta};
use rand_core::RngCore;

/// Quadrature tolerance for the check integrals; the acceptance gates ask
/// for 1e-8 and 1e-6, so aim two orders below.
const QUAD_TOL: f64 = 1e-11;

/// Both shape parameters of the stationary law: ρ is Beta(5/3, 5/3).
const RHO_SHAPE: f64 = 5.0 / 3.0;

/// 1 / B(5/3, 5/3), the normalizer of ρ.
fn rho_normalizer() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| (-ln_beta(RHO_SHAPE, RHO_SHAPE)).exp())
}

/// Stationary density ρ(x) ∝ (x(1−x))^{2/3} of the normalized interface
/// position on [0, 1].
pub fn rho_density(x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "interface position lives on [0, 1], got {x}"
    );
    rho_normalizer() * (x * (1.0 - x)).powf(2.0 / 3.0)
}

/// Draws one stationary interface position, Z ~ Beta(5/3, 5/3).
pub fn sample_rho(rng: &mut impl RngCore) -> f64 {
    sample_beta(rng, RHO_SHAPE, RHO_SHAPE).expect("fixed valid shapes")
}

/// Total scale span Λ = φ(1) = B(1/3, 1/3) ≈ 5.2999: the natural-scale
/// length of the unit interval for the interface diffusion. The same
/// constant normalizes the invariant record-gap density in the stable
/// crate; the agreement is not a coincidence and is pinned by a test.
pub fn scale_span() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| beta(1.0 / 3.0, 1.0 / 3.0))
}

/// Scale function φ(x) = ∫₀ˣ (u(1−u))^{−2/3} du of the interface diffusion.
///
/// Both endpoints carry a −2/3 power singularity; quadrature nodes resolve
/// the one at 0 exactly, so for x > 1/2 the reflection φ(x) = Λ − φ(1−x)
/// routes the computation through the accurate side.
pub fn scale_function(x: f64) -> Result<f64, QuadError> {
    assert!(
        (0.0..=1.0).contains(&x),
        "interface position lives on [0, 1], got {x}"
    );
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > 0.5 {
        return Ok(scale_span() - scale_function(1.0 - x)?);
    }
    integrate(|u| (u * (1.0 - u)).powf(-2.0 / 3.0), 0.0, x, QUAD_TOL)
}

/// The three quadrature-vs-closed-form checks on the stationary law.
#[derive(Debug, Clone, Copy)]
pub struct RhoChecks {
    /// ∫₀¹ ρ — exactly 1.
    pub mass: f64,
    /// ∫₀¹ ρ(x)/(x(1−x)) dx — exactly 7 by the Gamma recurrence.
    pub visit_rate: f64,
    /// ∫₀¹ (u(1−u))^{−2/3} du by quadrature — exactly Λ = B(1/3, 1/3).
    pub scale_span_quadrature: f64,
}

/// Recomputes the three stationary-law integrals by quadrature so callers
/// can compare them against their exact values (1, 7, Λ).
///
/// Each integrand is symmetric about 1/2, so the integrals are folded onto
/// (0, 1/2] where the only singular endpoint sits at 0 and the nodes are
/// exact.
pub fn rho_checks() -> Result<RhoChecks, QuadError> {
    let mass = 2.0 * integrate(rho_density, 0.0, 0.5, QUAD_TOL)?;
    let visit_rate = 2.0
        * integrate(
            |x| rho_density(x) / (x * (1.0 - x)),
            0.0,
            0.5,
            QUAD_TOL,
        )?;
    let scale_span_quadrature =
        2.0 * integrate(|u| (u * (1.0 - u)).powf(-2.0 / 3.0), 0.0, 0.5, QUAD_TOL)?;
    Ok(RhoChecks {
        mass,
        visit_rate,
        scale_span_quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use peelab_numerics::ks_distance_density;
    use peelab_numerics::rng::derive_stream;
    use peelab_numerics::special::ln_gamma;

    #[test]
    fn stationary_law_mass_and_visit_rate() {
        let checks = rho_checks().unwrap();
        assert!(
            (checks.mass - 1.0).abs() < 1e-8,
            "mass {} should be 1",
            checks.mass
        );
        assert!(
            (checks.visit_rate - 7.0).abs() < 1e-6,
            "visit rate {} should be 7",
            checks.visit_rate
        );
    }

    #[test]
    fn visit_rate_is_exactly_seven_by_gamma_recurrence() {
        // ∫ρ/(x(1−x)) = B(2/3, 2/3)/B(5/3, 5/3) = (28/9)·(Γ(2/3)/Γ(5/3))²
        // and Γ(5/3) = (2/3)Γ(2/3), so the ratio collapses to 28/4 = 7.
        let ratio = (ln_beta(2.0 / 3.0, 2.0 / 3.0) - ln_beta(5.0 / 3.0, 5.0 / 3.0)).exp();
        assert!((ratio - 7.0).abs() < 1e-10, "beta ratio {ratio}");
    }

    #[test]
    fn scale_span_matches_gamma_duplication_form() {
        // Λ = B(1/3, 1/3) = Γ(1/6)Γ(1/3)/(2^{2/3}√π) by Legendre duplication,
        // and the decimal expansion starts 5.29991625.
        let duplication = (ln_gamma(1.0 / 6.0) + ln_gamma(1.0 / 3.0)
            - (2.0 / 3.0) * std::f64::consts::LN_2
            - 0.5 * std::f64::consts::PI.ln())
        .exp();
        assert!((scale_span() - duplication).abs() < 1e-10);
        assert!((scale_span() - 5.29991625).abs() < 1e-7);
    }

    #[test]
    fn scale_span_quadrature_agrees_with_closed_form() {
        let checks = rho_checks().unwrap();
        assert!(
            (checks.scale_span_quadrature - scale_span()).abs() < 1e-8,
            "quadrature {} vs closed form {}",
            checks.scale_span_quadrature,
            scale_span()
        );
    }

    #[test]
    fn scale_function_reflection_is_consistent() {
        // φ(0.7) goes through the reflection identity; recomputing the
        // integral directly over (0, 0.7) must land on the same value.
        let via_reflection = scale_function(0.7).unwrap();
        let direct = integrate(|u| (u * (1.0 - u)).powf(-2.0 / 3.0), 0.0, 0.7, 1e-11).unwrap();
        assert!(
            (via_reflection - direct).abs() < 1e-8,
            "{via_reflection} vs {direct}"
        );
    }

    #[test]
    fn scale_function_is_monotone_and_spans_lambda() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let values: Vec<f64> = grid.iter().map(|&x| scale_function(x).unwrap()).collect();
        for pair in values.windows(2) {
            assert!(pair[1] > pair[0], "scale function must increase");
        }
        assert_eq!(values[0], 0.0);
        assert!((values[10] - scale_span()).abs() < 1e-9);
    }

    #[test]
    fn rho_sampler_matches_density() {
        let mut rng = derive_stream(61, 0);
        let sample: Vec<f64> = (0..100_000).map(|_| sample_rho(&mut rng)).collect();
        let d = ks_distance_density(&sample, rho_density, 0.0, 2_000).unwrap();
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn rho_density_rejects_out_of_range() {
        let result = std::panic::catch_unwind(|| rho_density(1.5));
        assert!(result.is_err());
    }
}
