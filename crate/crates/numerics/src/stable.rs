//! Sampler for the spectrally negative 3/2-stable distribution.
//!
//! `sample_stable32` draws the marginal S₁ of the Lévy process normalized by
//! its Laplace transform, E[exp(λ S_t)] = exp(t λ^{3/2}) for λ ≥ 0; the
//! self-similar marginal at other times is S_t = t^{2/3} S₁. The generator is
//! the Chambers–Mallows–Stuck trigonometric construction specialized to
//! index 3/2 and maximal negative skew, with the scale folded in so no
//! prefactor remains.

use rand_core::RngCore;

use crate::rng::open01;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

/// Draws S₁, the spectrally negative 3/2-stable variable with
/// E[exp(λ S₁)] = exp(λ^{3/2}).
///
/// Construction: V uniform on (−π/2, π/2), W unit exponential, then
///
/// ```text
/// S₁ = sin(1.5 (V + π/6)) / (cos V)^{2/3} · [cos(0.5 V + π/4) / W]^{-1/3}.
/// ```
///
/// Every factor is evaluated strictly inside its domain because `open01`
/// never returns 0 or 1.
pub fn sample_stable32(rng: &mut impl RngCore) -> f64 {
    let v = std::f64::consts::PI * (open01(rng) - 0.5);
    let w = -open01(rng).ln();
    let numerator = (1.5 * (v + FRAC_PI_6)).sin();
    let denominator = v.cos().powf(2.0 / 3.0);
    let tilt = ((0.5 * v + FRAC_PI_4).cos() / w).powf(-1.0 / 3.0);
    numerator / denominator * tilt
}

/// Draws S_t = t^{2/3} S₁ for a time horizon `t > 0`.
pub fn sample_stable32_at(rng: &mut impl RngCore, t: f64) -> f64 {
    assert!(
        t > 0.0 && t.is_finite(),
        "stable marginal requires a positive finite time, got {t}"
    );
    t.powf(2.0 / 3.0) * sample_stable32(rng)
}

/// Domain sanity shared by the tests: V strictly inside (−π/2, π/2).
#[allow(dead_code)]
fn v_in_open_domain(v: f64) -> bool {
    v > -FRAC_PI_2 && v < FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    /// Empirical E[exp(λ S)] with its standard error.
    fn laplace_estimate(samples: &[f64], lambda: f64) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&s| (lambda * s).exp()).sum::<f64>() / n;
        let var = samples
            .iter()
            .map(|&s| {
                let d = (lambda * s).exp() - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn laplace_transform_matches_closed_form() {
        // E[exp(λ S₁)] = exp(λ^{3/2}) pins index, skew, and scale at once:
        // any error in the trig construction shifts at least one λ visibly.
        let mut rng = derive_stream(13, 0);
        let samples: Vec<f64> = (0..2_000_000).map(|_| sample_stable32(&mut rng)).collect();
        for &lambda in &[0.5, 1.0, 2.0] {
            let target = (lambda as f64).powf(1.5).exp();
            let (est, se) = laplace_estimate(&samples, lambda);
            assert!(
                (est - target).abs() < 4.0 * se,
                "lambda {lambda}: estimate {est} ± {se} vs {target}"
            );
        }
    }

    #[test]
    fn time_scaling_matches_laplace_transform() {
        // S_t = t^{2/3} S₁ must satisfy E[exp(λ S_t)] = exp(t λ^{3/2}).
        let mut rng = derive_stream(13, 1);
        let t = 0.25;
        let samples: Vec<f64> = (0..1_000_000)
            .map(|_| sample_stable32_at(&mut rng, t))
            .collect();
        let (est, se) = laplace_estimate(&samples, 1.0);
        let target = (t * 1.0f64).exp();
        assert!(
            (est - target).abs() < 4.0 * se,
            "estimate {est} ± {se} vs {target}"
        );
    }

    #[test]
    fn heavy_left_tail_light_right_tail() {
        // Spectral negativity: big negative values occur (power-law left
        // tail), while the right tail is thinner than exponential.
        let mut rng = derive_stream(13, 2);
        let samples: Vec<f64> = (0..1_000_000).map(|_| sample_stable32(&mut rng)).collect();
        let deep_left = samples.iter().filter(|&&s| s < -20.0).count();
        let deep_right = samples.iter().filter(|&&s| s > 20.0).count();
        assert!(deep_left > 100, "left tail too thin: {deep_left}");
        assert_eq!(deep_right, 0, "right tail too heavy: {deep_right}");
    }

    #[test]
    fn all_outputs_finite() {
        let mut rng = derive_stream(13, 3);
        for _ in 0..1_000_000 {
            let s = sample_stable32(&mut rng);
            assert!(s.is_finite());
        }
    }

    #[test]
    #[should_panic(expected = "positive finite time")]
    fn rejects_zero_time() {
        let mut rng = derive_stream(13, 4);
        sample_stable32_at(&mut rng, 0.0);
    }
}
