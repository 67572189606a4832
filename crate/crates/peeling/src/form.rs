//! The one-step peeling law of the half-planar triangulation.
//!
//! Peeling a boundary edge reveals the adjacent triangle, which either
//! attaches by a new interior vertex (`Center`, boundary grows by one) or
//! closes off `k ≥ 1` boundary edges to one side (`Left(k)` / `Right(k)`,
//! boundary shrinks by `k`). The probabilities are
//!
//! ```text
//! P(Center)  = 2/3,
//! P(Left(k)) = P(Right(k)) = q(k) = (2k−2)! / (4^k (k−1)! (k+1)!),
//! ```
//!
//! with `q(k) ~ k^{-5/2}/(4√π)`, Σ q(k) = 1/6 per side, and Σ k·q(k) = 1/3,
//! so the signed boundary-length increments are centered and heavy-tailed —
//! the microscopic source of the 3/2-stable scaling limit.

use peelab_numerics::special::ln_gamma;
use thiserror::Error;

use crate::halfint::HalfInt;

/// Probability of a `Center` step.
pub const Q_CENTER: f64 = 2.0 / 3.0;

/// Mass of each side's whole jump family: Σ_{k≥1} q(k) = 1/6.
pub const Q_SIDE_TOTAL: f64 = 1.0 / 6.0;

/// Expected jump size per side: Σ_{k≥1} k·q(k) = 1/3.
pub const Q_SIDE_FIRST_MOMENT: f64 = 1.0 / 3.0;

/// Outcome of revealing one triangle.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Form {
    /// New interior vertex; the boundary gains one edge.
    Center,
    /// The triangle closes off `k` boundary edges to the left.
    Left(u64),
    /// The triangle closes off `k` boundary edges to the right.
    Right(u64),
}

impl Form {
    /// Jump size, or `None` for `Center`.
    pub fn jump(self) -> Option<u64> {
        match self {
            Form::Center => None,
            Form::Left(k) | Form::Right(k) => Some(k),
        }
    }

    /// Single-letter code used in CSV dumps: C, L, or R.
    pub fn kind_code(self) -> char {
        match self {
            Form::Center => 'C',
            Form::Left(_) => 'L',
            Form::Right(_) => 'R',
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("jump size must be at least 1, got {0}")]
    JumpTooSmall(u64),
}

/// Probability q(k) of a size-`k` left jump (equal to the right jump's by
/// symmetry), evaluated through log-gamma so no factorial overflows.
pub fn q_left(k: u64) -> Result<f64, FormError> {
    if k < 1 {
        return Err(FormError::JumpTooSmall(k));
    }
    let kf = k as f64;
    // ln q = lnΓ(2k−1) − k·ln4 − lnΓ(k) − lnΓ(k+2)
    let ln_q = ln_gamma(2.0 * kf - 1.0) - kf * 4.0f64.ln() - ln_gamma(kf) - ln_gamma(kf + 2.0);
    Ok(ln_q.exp())
}

/// Upper envelope q(k) ≤ k^{-5/2}/(4√π), tight as k → ∞.
pub fn q_envelope(k: u64) -> f64 {
    (k as f64).powf(-2.5) / (4.0 * std::f64::consts::PI.sqrt())
}

/// Partial sums of the jump law up to `k_max`, accumulated with exact
/// ratio recursion (q(k+1) = q(k)·(2k−1)/(2k+4)) and Kahan compensation:
/// returns (Σ q(k), Σ k·q(k)).
pub fn q_partial_sums(k_max: u64) -> (f64, f64) {
    let mut q = 0.125; // q(1) = 1/8
    let (mut mass, mut mass_c) = (0.0f64, 0.0f64);
    let (mut moment, mut moment_c) = (0.0f64, 0.0f64);
    let kahan_add = |sum: &mut f64, comp: &mut f64, term: f64| {
        let y = term - *comp;
        let t = *sum + y;
        *comp = (t - *sum) - y;
        *sum = t;
    };
    for k in 1..=k_max {
        kahan_add(&mut mass, &mut mass_c, q);
        kahan_add(&mut moment, &mut moment_c, k as f64 * q);
        let kf = k as f64;
        q *= (2.0 * kf - 1.0) / (2.0 * kf + 4.0);
    }
    (mass, moment)
}

/// Analytic bound on the mass beyond `k_max`: Σ_{k>K} q(k) ≤ K^{-3/2}/(6√π).
///
/// Follows from the envelope by the integral comparison
/// Σ_{k>K} k^{-5/2} ≤ ∫_K^∞ x^{-5/2} dx = (2/3)K^{-3/2}.
pub fn q_tail_mass_bound(k_max: u64) -> f64 {
    (k_max as f64).powf(-1.5) / (6.0 * std::f64::consts::PI.sqrt())
}

/// Right-distance increment of the half step: +½ on `Center`, −k on
/// `Right(k)`, 0 on `Left(k)`.
pub fn delta_plus(f: Form) -> HalfInt {
    match f {
        Form::Center => HalfInt::HALF,
        Form::Right(k) => HalfInt::from_int(-(k as i64)),
        Form::Left(_) => HalfInt::ZERO,
    }
}

/// Left-distance increment of the half step: +½ on `Center`, −k on
/// `Left(k)`, 0 on `Right(k)`.
pub fn delta_minus(f: Form) -> HalfInt {
    match f {
        Form::Center => HalfInt::HALF,
        Form::Left(k) => HalfInt::from_int(-(k as i64)),
        Form::Right(_) => HalfInt::ZERO,
    }
}
