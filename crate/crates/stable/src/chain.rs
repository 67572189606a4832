//! The record-gap Markov chain and the commuting-count estimator.
//!
//! The chain tracks successive *gaps* — log-ratios of consecutive record
//! depths. One transition from a gap x has two stages:
//!
//! 1. split the gap at the last regeneration point before the current
//!    record, Beta(1/3, 2/3)-distributed in the natural (exponentiated)
//!    coordinate, leaving a residual log-distance c ∈ (0, x);
//! 2. jump past the record with an independent index-1/3 overshoot,
//!    V^{−3} with V uniform, conditioned to clear the residual c.
//!
//! The part of the jump beyond the old record is the new gap. Summing the
//! gaps gives the log of the record depth itself, which grows at the
//! almost-sure rate π/√3 per step — the quantity `estimate_xi_rate`
//! measures and `comstable_estimate` inverts into a commuting count.

use std::io::{self, Write};

use peelab_numerics::rng::open01;
use peelab_numerics::{sample_beta, MeanStderr};
use rand_core::RngCore;

use crate::measures::invariant_mean_gap;

/// Limit of (commuting count)/(log depth) for deep targets:
/// (3/2)/(π/√3) = 3√3/(2π) ≈ 0.8269933431.
pub fn comstable_rate_constant() -> f64 {
    1.5 / invariant_mean_gap()
}

/// Draws the next gap of the record cascade given the current gap `x`.
///
/// Stage 1 places the last regeneration at log-distance
/// c = −ln(1 − (1−S)(1−e^{−x})) before the record, S ~ Beta(1/3, 2/3);
/// stage 2 overshoots it so that the new gap y satisfies
/// e^y − 1 = (1 − e^{−c})(1 − V³)/V³. Both stages are evaluated through
/// `ln1p`/`expm1`, so gaps from 10⁻⁸ to several hundred round-trip without
/// overflow, and the result is strictly positive by construction.
pub fn sample_record_gap(rng: &mut impl RngCore, x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "record-gap chain needs x > 0, got {x}");
    let s = sample_beta(rng, 1.0 / 3.0, 2.0 / 3.0).expect("fixed valid shapes");
    let qx = -(-x).exp_m1(); // 1 − e^{−x}
    // Two writings of the same residual, picked for precision. The ln1p
    // form only degrades when 1−s rounds to 1 (s < 2⁻⁵⁴) *and* the true
    // residual is large — which needs x ≥ ln 2; there the complementary
    // sum s·qx + e^{−x} stays away from 1 and never cancels. Everywhere
    // else (small x, or s > ½ where 1−s is exact) ln1p is the sharp form.
    let c = if s <= 0.5 && x >= std::f64::consts::LN_2 {
        -(s * qx + (-x).exp()).ln()
    } else {
        -(-(1.0 - s) * qx).ln_1p()
    };
    // Either form can land one ulp past x when s is at the bottom of its
    // range (the exact s → 0 limit is c = x); clamp to the mathematical
    // range (0, x].
    let c = c.min(x);
    debug_assert!(c > 0.0 && c <= x, "residual {c} outside (0, {x}]");
    let v = open01(rng);
    // (1 − v³)/v³ with the cancellation at v → 1 factored out exactly.
    let m = (1.0 - v) * (1.0 + v + v * v) / (v * v * v);
    let y = ((-(-c).exp_m1()) * m).ln_1p();
    debug_assert!(y > 0.0 && y.is_finite(), "gap {y} from x = {x}");
    y
}

/// Gap chain with its accumulated log record depth.
#[derive(Clone, Debug)]
pub struct RecordChain {
    x: f64,
    log_xi: f64,
    steps: u64,
}

impl RecordChain {
    /// Steps discarded by [`RecordChain::equilibrated`]. The chain mixes in
    /// a handful of steps (its kernel is reversible with an exponential
    /// spectral gap); 10³ puts the start-up bias far below every Monte
    /// Carlo resolution used in this workspace.
    pub const BURN_IN: u64 = 1_000;

    /// Starts at gap `x0` with the log-depth accumulator at zero.
    pub fn new(x0: f64) -> RecordChain {
        assert!(x0 > 0.0 && x0.is_finite(), "start gap must be positive, got {x0}");
        RecordChain { x: x0, log_xi: 0.0, steps: 0 }
    }

    /// Starts from an exact draw of the invariant density — no burn-in.
    pub fn from_invariant(rng: &mut impl RngCore) -> RecordChain {
        RecordChain::new(crate::measures::sample_varpi(rng))
    }

    /// Runs [`Self::BURN_IN`] steps from x₀ = 1 and zeroes the accumulators,
    /// leaving the gap distributed according to the invariant density up to
    /// negligible bias.
    pub fn equilibrated(rng: &mut impl RngCore) -> RecordChain {
        let mut chain = RecordChain::new(1.0);
        for _ in 0..Self::BURN_IN {
            chain.step(rng);
        }
        chain.log_xi = 0.0;
        chain.steps = 0;
        chain
    }

    /// Current gap.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// Sum of all gaps since construction (or since the burn-in reset):
    /// the log of the record depth relative to the start.
    pub fn log_xi(&self) -> f64 {
        self.log_xi
    }

    /// Number of transitions taken since construction.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One transition; returns the new gap.
    pub fn step(&mut self, rng: &mut impl RngCore) -> f64 {
        let gap = sample_record_gap(rng, self.x);
        self.x = gap;
        self.log_xi += gap;
        self.steps += 1;
        gap
    }
}

/// One row of a chain trace: step index, gap after that step, accumulated
/// log record depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRow {
    pub n: u64,
    pub x: f64,
    pub log_xi: f64,
}

/// Advances the chain `steps` times, recording one row per transition.
pub fn run_trace(chain: &mut RecordChain, rng: &mut impl RngCore, steps: u64) -> Vec<ChainRow> {
    let mut rows = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        chain.step(rng);
        rows.push(ChainRow { n: chain.steps(), x: chain.x(), log_xi: chain.log_xi() });
    }
    rows
}

/// Writes a trace as CSV with header `n,x,log_xi`. Floats use the shortest
/// round-trip representation, so a parse of the output reproduces the run
/// bit for bit.
pub fn write_trace_csv<W: Write>(mut out: W, rows: &[ChainRow]) -> io::Result<()> {
    writeln!(out, "n,x,log_xi")?;
    for row in rows {
        writeln!(out, "{},{},{}", row.n, row.x, row.log_xi)?;
    }
    Ok(())
}

/// One replica of the log-depth growth rate: the average of `k` gaps along
/// an equilibrated chain.
pub fn xi_rate_replica(rng: &mut impl RngCore, k: u64) -> f64 {
    assert!(k > 0, "rate replica needs at least one step");
    let mut chain = RecordChain::equilibrated(rng);
    for _ in 0..k {
        chain.step(rng);
    }
    chain.log_xi() / k as f64
}

/// Monte Carlo estimate of the log-depth growth rate lim log ξ(n)/n = π/√3:
/// mean over `replicas` independent equilibrated chains of `k` gaps each.
pub fn estimate_xi_rate(rng: &mut impl RngCore, k: u64, replicas: u32) -> MeanStderr {
    assert!(replicas > 0, "rate estimate needs at least one replica");
    let samples: Vec<f64> = (0..replicas).map(|_| xi_rate_replica(rng, k)).collect();
    MeanStderr::from_samples(&samples)
}

/// Commuting count of one cascade run to log-depth `log_x`: the smallest
/// odd k whose accumulated gaps reach (3/2)·log x.
///
/// The 3/2 converts a spatial depth into the passage scale on the record
/// clock, and only odd indices count because consecutive records alternate
/// sides of the interface — a crossing completes when the side facing the
/// target is the one refreshed. In the short-horizon limit log x → 0⁺ the
/// very first gap (strictly positive) already clears the target, so the
/// count is 1.
pub fn comstable_replica(rng: &mut impl RngCore, log_x: f64) -> u64 {
    assert!(
        log_x >= 0.0 && log_x.is_finite(),
        "depth must be nonnegative and finite, got {log_x}"
    );
    let target = 1.5 * log_x;
    let mut chain = RecordChain::equilibrated(rng);
    let mut k = 0u64;
    loop {
        chain.step(rng);
        k += 1;
        if chain.log_xi() >= target {
            // If the even step crossed, the (k+1)-st accumulated sum can
            // only be larger, so the first odd qualifier is k + 1.
            return if k % 2 == 1 { k } else { k + 1 };
        }
    }
}

/// Mean and standard error of the commuting count over independent
/// replicas. The ratio mean/log_x tends to [`comstable_rate_constant`]
/// (≈ 0.827) as log_x grows, with an O(1/log_x) odd-rounding bias.
pub fn comstable_estimate(rng: &mut impl RngCore, log_x: f64, replicas: u32) -> MeanStderr {
    assert!(replicas > 0, "count estimate needs at least one replica");
    let samples: Vec<f64> = (0..replicas)
        .map(|_| comstable_replica(rng, log_x) as f64)
        .collect();
    MeanStderr::from_samples(&samples)
}
