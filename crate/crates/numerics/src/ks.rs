//! Kolmogorov–Smirnov distances for goodness-of-fit gates.
//!
//! Two flavors: sample-vs-CDF (one-sample) and sample-vs-sample
//! (two-sample). Both return the raw sup-distance; callers compare against
//! pre-agreed thresholds rather than p-values, since every gate in this
//! workspace fixes its replica count in advance.

use crate::quad::{integrate, QuadError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("KS distance needs a nonempty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("reference-density quadrature failed: {0}")]
    Quad(#[from] QuadError),
}

/// Sup-distance between the empirical CDF of `sample` and the reference
/// CDF `cdf` (which must be a genuine nondecreasing CDF on the sample range).
///
/// Sorts a copy of the sample and evaluates max(F(xᵢ) − i/n, (i+1)/n − F(xᵢ))
/// over order statistics — both one-sided gaps at every jump of the ECDF.
pub fn ks_distance_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, KsError> {
    if sample.is_empty() {
        return Err(KsError::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(KsError::NonFiniteSample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finiteness checked above"));
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = f - i as f64 / n;
        let above = (i + 1) as f64 / n - f;
        sup = sup.max(below).max(above);
    }
    Ok(sup)
}

/// Sup-distance between the empirical CDF of `sample` and the CDF of a
/// reference *density* on `(support_start, ∞)`, for references that have no
/// closed-form CDF.
///
/// The reference CDF is built once by cumulative quadrature along at most
/// `grid_points` order statistics of the sample (always including the
/// extremes), so the cost is a few thousand short smooth integrals instead
/// of one quadrature per observation. Restricting the sup to those order
/// statistics can only shrink the distance, by at most `1/grid_points` —
/// negligible against the gates used here (≥ 5·10⁻³) and irrelevant for
/// detecting real mismatches, which show up at 10–100× threshold.
///
/// The density may be singular at `support_start` (the quadrature is
/// endpoint-exact there); it must be integrable and normalized.
pub fn ks_distance_density(
    sample: &[f64],
    density: impl Fn(f64) -> f64,
    support_start: f64,
    grid_points: usize,
) -> Result<f64, KsError> {
    if sample.is_empty() || grid_points == 0 {
        return Err(KsError::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(KsError::NonFiniteSample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finiteness checked above"));
    let n = sorted.len();

    // Evenly spaced ranks, first and last forced in.
    let stride = (n / grid_points).max(1);
    let mut ranks: Vec<usize> = (0..n).step_by(stride).collect();
    if *ranks.last().expect("nonempty") != n - 1 {
        ranks.push(n - 1);
    }

    let quad_tol = 1e-11;
    let mut sup = 0.0f64;
    let mut f_acc = 0.0f64; // reference CDF at the previous grid abscissa
    let mut prev_x = support_start;
    for &i in &ranks {
        let x = sorted[i];
        if x > prev_x {
            f_acc += integrate(&density, prev_x, x, quad_tol)?;
            prev_x = x;
        }
        let below = f_acc - i as f64 / n as f64;
        let above = (i + 1) as f64 / n as f64 - f_acc;
        sup = sup.max(below).max(above);
    }
    Ok(sup)
}

/// Sup-distance between the empirical CDFs of two samples.
///
/// Classic merge walk over both sorted samples; ties are consumed from both
/// sides before the distance is read so equal values never inflate it.
pub fn ks_distance_two_sample(a: &[f64], b: &[f64]) -> Result<f64, KsError> {
    if a.is_empty() || b.is_empty() {
        return Err(KsError::EmptySample);
    }
    if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(KsError::NonFiniteSample);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("finiteness checked above"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("finiteness checked above"));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, open01};

    #[test]
    fn point_mass_against_uniform_is_one() {
        // A single observation at 0 against U(0,1): the ECDF jumps to 1 at
        // 0 where the reference is still 0.
        let d = ks_distance_cdf(&[0.0], |x| x.clamp(0.0, 1.0)).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn uniform_sample_against_uniform_cdf_is_small() {
        let mut rng = derive_stream(14, 0);
        let sample: Vec<f64> = (0..100_000).map(|_| open01(&mut rng)).collect();
        let d = ks_distance_cdf(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        // Kolmogorov scaling: typical distance ~1/√n ≈ 0.003; demand the
        // generous 0.01 so only a real defect trips this.
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn shifted_uniform_detected() {
        let mut rng = derive_stream(14, 1);
        let sample: Vec<f64> = (0..10_000).map(|_| 0.1 + 0.9 * open01(&mut rng)).collect();
        let d = ks_distance_cdf(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d > 0.08, "shift should be visible, got {d}");
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let d = ks_distance_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn two_large_uniform_samples_agree() {
        let mut rng = derive_stream(14, 2);
        let a: Vec<f64> = (0..100_000).map(|_| open01(&mut rng)).collect();
        let b: Vec<f64> = (0..100_000).map(|_| open01(&mut rng)).collect();
        let d = ks_distance_two_sample(&a, &b).unwrap();
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn two_sample_detects_scale_change() {
        let mut rng = derive_stream(14, 3);
        let a: Vec<f64> = (0..20_000).map(|_| open01(&mut rng)).collect();
        let b: Vec<f64> = (0..20_000).map(|_| 0.8 * open01(&mut rng)).collect();
        let d = ks_distance_two_sample(&a, &b).unwrap();
        assert!(d > 0.15, "scale change should be visible, got {d}");
    }

    #[test]
    fn two_sample_handles_unequal_sizes_and_ties() {
        // a = {1, 2}, b = {1, 1, 3}: after consuming the tie at 1 the ECDFs
        // read 1/2 vs 2/3; at 2 they read 1 vs 2/3 — the sup is 1/3.
        let d = ks_distance_two_sample(&[1.0, 2.0], &[1.0, 1.0, 3.0]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn density_path_agrees_with_closed_form_cdf() {
        // Exponential draws; the grid-quadrature distance must agree with
        // the exact-CDF distance up to the 1/grid_points restriction error.
        let mut rng = derive_stream(14, 4);
        let sample: Vec<f64> = (0..20_000).map(|_| -open01(&mut rng).ln()).collect();
        let exact = ks_distance_cdf(&sample, |x| 1.0 - (-x).exp()).unwrap();
        let gridded = ks_distance_density(&sample, |x| (-x).exp(), 0.0, 2_000).unwrap();
        assert!(gridded <= exact + 1e-9, "grid sup cannot exceed exact sup");
        assert!(exact - gridded <= 1.0 / 2_000.0 + 1e-9, "exact {exact} grid {gridded}");
    }

    #[test]
    fn density_path_handles_edge_singularity() {
        // X = U³ has density (1/3)x^{−2/3} on (0,1] — singular at the left
        // endpoint, where the cumulative quadrature starts.
        let mut rng = derive_stream(14, 5);
        let sample: Vec<f64> = (0..50_000).map(|_| open01(&mut rng).powi(3)).collect();
        let d = ks_distance_density(&sample, |x| x.powf(-2.0 / 3.0) / 3.0, 0.0, 2_000).unwrap();
        assert!(d < 0.01, "KS distance {d}");
        // A wrong exponent must be flagged loudly.
        let bad = ks_distance_density(&sample, |x| 0.5 * x.powf(-0.5), 0.0, 2_000).unwrap();
        assert!(bad > 0.05, "mismatch should be visible, got {bad}");
    }

    #[test]
    fn empty_inputs_error() {
        assert!(ks_distance_cdf(&[], |x| x).is_err());
        assert!(ks_distance_two_sample(&[], &[1.0]).is_err());
        assert!(ks_distance_two_sample(&[1.0], &[]).is_err());
        assert!(ks_distance_density(&[], |_| 1.0, 0.0, 100).is_err());
    }

    #[test]
    fn non_finite_inputs_error() {
        assert!(ks_distance_cdf(&[f64::NAN], |x| x).is_err());
        assert!(ks_distance_two_sample(&[1.0, f64::INFINITY], &[1.0]).is_err());
    }
}
