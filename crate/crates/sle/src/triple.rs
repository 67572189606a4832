//! Physical-time backend: the coordinate triple (G, U, D) plus marked
//! boundary points.
//!
//! The tip U is a Brownian motion with quadratic variation 6t. The squared
//! spreads G (tip to left hull edge, L = U − √G) and D (tip to right hull
//! edge, R = U + √D) solve
//!
//! ```text
//! dG = 2√G dU + 10 dt,       dD = −2√D dU + 10 dt,
//! ```
//!
//! driven by the *same* increment with opposite signs. Marginally each is a
//! time-changed squared Bessel process of dimension 5/3 — G_t = X_{6t} with
//! X ~ BESQ(5/3) — which the stepper exploits: near 0, where Euler steps
//! would constantly overshoot into negative values, the coordinate is
//! advanced by the exact transition instead, and boundary touches are
//! detected by the exact first-passage probability rather than by
//! thresholding. Away from 0 a full-truncation Euler step keeps the
//! anticorrelation between G and D.
//!
//! Marked points h > 0 on the right boundary flow by dh = 2dt/(h − U) and
//! are swallowed when the right hull edge catches them, up to a relative
//! tolerance. Commuting counts are read off this backend directly: the
//! index of the first odd alternated boundary touch after the swallow of
//! the reference point at 1 that happens no earlier than the swallow of the
//! target.

use peelab_numerics::dist::{besq_bridge_no_touch_prob, besq_step};
use peelab_numerics::rng::open01;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Quadratic variation of the tip per unit time.
const TIP_VARIANCE_RATE: f64 = 6.0;
/// Drift of each squared spread per unit time.
const SPREAD_DRIFT: f64 = 10.0;
/// Squared-Bessel dimension of the spreads in the tip's clock.
const SPREAD_DIM: f64 = 5.0 / 3.0;
/// A spread below max(1e-4, 400·dt) is advanced by the exact transition.
/// The dt-scaled part keeps the Euler branch four standard deviations away
/// from the truncation boundary (per-step noise variance is 24·G·dt); the
/// floor keeps the exact branch active near 0 even for very small steps.
const EXACT_ZONE_FLOOR: f64 = 1e-4;
const EXACT_ZONE_PER_DT: f64 = 400.0;
/// A marked point is swallowed when h − U − √D ≤ SWALLOW_TOL · (h − U).
pub const SWALLOW_TOL: f64 = 1e-6;
/// Largest admissible commuting-count target: the physical horizon grows
/// like the square of the target, so counts beyond e⁶ are out of reach.
pub const MAX_TARGET: f64 = 403.4287934927351; // e⁶

/// Errors from the physical-time backend.
#[derive(Debug, Error)]
pub enum TripleError {
    #[error("marked points must sit strictly right of the tip, got {0}")]
    BadMarkedPoint(f64),
    #[error("commuting-count targets must lie in [1, e⁶], got {0}")]
    TargetOutOfRange(f64),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("step budget exhausted after {steps} steps with {pending} marked points still alive")]
    BudgetExhausted { steps: u64, pending: usize },
}

/// A still-alive marked boundary point: its label and current image.
#[derive(Debug, Clone, Copy)]
pub struct MarkedPoint {
    pub label: u32,
    pub position: f64,
}

/// A swallowed marked point: its label and the swallow time.
#[derive(Debug, Clone, Copy)]
pub struct Swallow {
    pub label: u32,
    pub time: f64,
}

/// The coordinate triple with its marked-point bookkeeping.
#[derive(Debug, Clone)]
pub struct TripleState {
    pub t: f64,
    /// Squared spread from the tip to the left hull edge.
    pub g: f64,
    /// Tip position.
    pub u: f64,
    /// Squared spread from the tip to the right hull edge.
    pub d: f64,
    marked: Vec<MarkedPoint>,
    swallowed: Vec<Swallow>,
}

/// What a single step observed.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepReport {
    /// The left spread visited 0 during the step (hull touched ℝ₋).
    pub touched_left: bool,
    /// The right spread visited 0 during the step (hull touched ℝ₊).
    pub touched_right: bool,
}

impl TripleState {
    /// Fresh state at the origin (t = 0, G = U = D = 0) with marked points
    /// at the given positive positions, labeled by input index.
    pub fn new(marked_positions: &[f64]) -> Result<Self, TripleError> {
        let mut marked = Vec::with_capacity(marked_positions.len());
        for (i, &p) in marked_positions.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(TripleError::BadMarkedPoint(p));
            }
            marked.push(MarkedPoint {
                label: i as u32,
                position: p,
            });
        }
        marked.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(TripleState {
            t: 0.0,
            g: 0.0,
            u: 0.0,
            d: 0.0,
            marked,
            swallowed: Vec::new(),
        })
    }

    /// State with explicit coordinates and no marked points, for moment
    /// checks and for matching initial conditions across backends.
    pub fn from_coordinates(t: f64, g: f64, u: f64, d: f64) -> Self {
        assert!(g >= 0.0 && d >= 0.0, "squared spreads cannot be negative");
        TripleState {
            t,
            g,
            u,
            d,
            marked: Vec::new(),
            swallowed: Vec::new(),
        }
    }

    /// Total spread √G + √D (the hull diameter on the real line).
    pub fn delta(&self) -> f64 {
        self.g.sqrt() + self.d.sqrt()
    }

    /// Left hull edge U − √G.
    pub fn left(&self) -> f64 {
        self.u - self.g.sqrt()
    }

    /// Right hull edge U + √D.
    pub fn right(&self) -> f64 {
        self.u + self.d.sqrt()
    }

    /// Marked points not yet swallowed, ascending by position.
    pub fn alive(&self) -> &[MarkedPoint] {
        &self.marked
    }

    /// Swallowed marked points in swallow order.
    pub fn swallowed(&self) -> &[Swallow] {
        &self.swallowed
    }
}

/// Advances one squared spread over dt. `dw` is the (signed) tip increment
/// this spread couples to; it is consumed by the Euler branch and ignored
/// by the exact branch, which draws its own transition randomness.
/// Returns the new value and whether the spread visited 0 during the step.
///
/// The exact branch decides the visit from BOTH endpoints of the substep
/// (the bridge no-touch probability), not from the start value alone.
/// Start-only detection draws the visit independently of where the path
/// lands, and over consecutive substeps that converts near-misses into
/// recorded visits: surviving paths sit systematically higher than the
/// unconditioned transition, so first visits fire early.
fn advance_spread(rng: &mut impl RngCore, v: f64, dw: f64, dt: f64) -> (f64, bool) {
    let zone = EXACT_ZONE_FLOOR.max(EXACT_ZONE_PER_DT * dt);
    if v < zone {
        let bessel_dt = TIP_VARIANCE_RATE * dt;
        let next = besq_step(rng, v, SPREAD_DIM, bessel_dt).expect("validated arguments");
        let p_no = besq_bridge_no_touch_prob(v, next, SPREAD_DIM, bessel_dt);
        let touched = p_no <= 0.0 || open01(rng) >= p_no;
        (next, touched)
    } else {
        let next = v + 2.0 * v.sqrt() * dw + SPREAD_DRIFT * dt;
        if next < 0.0 {
            (0.0, true)
        } else {
            (next, false)
        }
    }
}

/// One time step of the full triple: shared tip increment, both spreads,
/// marked-point flow, then the swallow sweep.
pub fn step_triple(
    state: &mut TripleState,
    dt: f64,
    rng: &mut impl RngCore,
) -> Result<StepReport, TripleError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(TripleError::BadStep(dt));
    }
    let noise: f64 = StandardNormal.sample(rng);
    let du = (TIP_VARIANCE_RATE * dt).sqrt() * noise;

    let (g_next, touched_left) = advance_spread(rng, state.g, du, dt);
    let (d_next, touched_right) = advance_spread(rng, state.d, -du, dt);

    // Marked points flow against the pre-step tip; their ODE is smooth up
    // to the swallow time, which the sweep below detects afterwards.
    let u_old = state.u;
    for m in &mut state.marked {
        m.position += 2.0 * dt / (m.position - u_old);
    }

    state.g = g_next;
    state.d = d_next;
    state.u += du;
    state.t += dt;

    // Swallow sweep: positions are ordered, and the flow preserves order,
    // so the swallowed set is always a prefix of the alive list.
    let t_now = state.t;
    let u_now = state.u;
    let d_sqrt = state.d.sqrt();
    let mut cut = 0;
    while cut < state.marked.len() {
        let gap = state.marked[cut].position - u_now;
        if gap - d_sqrt <= SWALLOW_TOL * gap {
            cut += 1;
        } else {
            break;
        }
    }
    for m in state.marked.drain(..cut) {
        state.swallowed.push(Swallow {
            label: m.label,
            time: t_now,
        });
    }

    Ok(StepReport {
        touched_left,
        touched_right,
    })
}

/// Runs the triple to time `t_end` with fixed step `dt` (last step shortened
/// to land exactly). No marked-point or touch bookkeeping is returned; this
/// is the plain driver for moment checks.
pub fn run_triple_to(
    state: &mut TripleState,
    t_end: f64,
    dt: f64,
    rng: &mut impl RngCore,
) -> Result<(), TripleError> {
    while state.t < t_end {
        let step = dt.min(t_end - state.t);
        if step <= 0.0 {
            break;
        }
        step_triple(state, step, rng)?;
    }
    Ok(())
}

/// One commuting-count observation.
#[derive(Debug, Clone, Copy)]
pub struct CommutingSample {
    /// The requested target position.
    pub target: f64,
    /// First odd alternated-touch index at or after the target's swallow.
    pub count: u32,
}

/// Simulates one hull trajectory with marked points at 1 and at each
/// target, and reads off the commuting count for every target.
///
/// `step_scale` is the r-resolution: each step uses dt = step_scale · Δ²
/// (with a small floor so the trajectory can leave the origin), which makes
/// the cost of a quadratically growing physical horizon logarithmic in the
/// target. The alternated-touch chain starts counting at the first touch
/// after the swallow of the reference point 1; a touch only advances the
/// chain when its side differs from the previous counted touch. The count
/// for target x is the first odd index k whose touch happens no earlier
/// than the swallow of x — in particular the count for x = 1 is always 1.
///
/// Targets must lie in [1, e⁶]; the step budget caps the total step count.
pub fn comsle_direct(
    targets: &[f64],
    step_scale: f64,
    budget: u64,
    rng: &mut impl RngCore,
) -> Result<Vec<CommutingSample>, TripleError> {
    if !(step_scale > 0.0) || !step_scale.is_finite() {
        return Err(TripleError::BadStep(step_scale));
    }
    for &x in targets {
        if !(1.0..=MAX_TARGET).contains(&x) {
            return Err(TripleError::TargetOutOfRange(x));
        }
    }

    // Marked positions: the reference at 1 plus the distinct targets.
    // Positions are keyed back to the requested targets at the end.
    let mut positions: Vec<f64> = Vec::with_capacity(targets.len() + 1);
    positions.push(1.0);
    positions.extend_from_slice(targets);
    positions.sort_by(f64::total_cmp);
    positions.dedup();
    let mut state = TripleState::new(&positions)?;
    let reference_label = 0u32; // positions[0] == 1.0 after the sort

    let mut swallow_times: Vec<Option<f64>> = vec![None; positions.len()];
    let mut counts: Vec<Option<u32>> = vec![None; positions.len()];
    let mut reference_time: Option<f64> = None;

    // Alternation state of the touch chain and the index counter, which
    // only runs once the reference point is gone.
    let mut last_side: Option<bool> = None; // false = left, true = right
    let mut chain_index: u32 = 0;

    let mut steps: u64 = 0;
    while counts.iter().any(Option::is_none) {
        if steps >= budget {
            return Err(TripleError::BudgetExhausted {
                steps,
                pending: counts.iter().filter(|c| c.is_none()).count(),
            });
        }
        steps += 1;

        let delta = state.delta();
        let dt = step_scale * (delta * delta).max(EXACT_ZONE_FLOOR);
        let report = step_triple(&mut state, dt, rng)?;

        let swallowed_len = state.swallowed().len();
        for s in &state.swallowed()[swallowed_len.saturating_sub(positions.len())..] {
            let idx = s.label as usize;
            if swallow_times[idx].is_none() {
                swallow_times[idx] = Some(s.time);
                if s.label == reference_label {
                    reference_time = Some(s.time);
                }
            }
        }

        for (side_touched, side) in [(report.touched_left, false), (report.touched_right, true)] {
            if !side_touched || last_side == Some(side) {
                continue;
            }
            last_side = Some(side);
            if reference_time.is_none() {
                continue;
            }
            chain_index += 1;
            if chain_index % 2 == 1 {
                let t_now = state.t;
                for (idx, slot) in counts.iter_mut().enumerate() {
                    if slot.is_none() {
                        if let Some(tau) = swallow_times[idx] {
                            if tau <= t_now {
                                *slot = Some(chain_index);
                            }
                        }
                    }
                }
            }
        }
    }

    let resolved: Vec<u32> = counts.into_iter().map(|c| c.expect("loop exit")).collect();
    Ok(targets
        .iter()
        .map(|&x| {
            let idx = positions
                .binary_search_by(|p| p.total_cmp(&x))
                .expect("every target was inserted");
            CommutingSample {
                target: x,
                count: resolved[idx],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use peelab_numerics::rng::derive_stream;
    use peelab_numerics::MeanStderr;

    /// Mean of G at fixed t is 10t regardless of the stepping regime.
    #[test]
    fn spread_mean_grows_at_rate_ten() {
        let mut rng = derive_stream(71, 0);
        let replicas = 100_000;
        let t_end = 1.0;
        let samples: Vec<f64> = (0..replicas)
            .map(|_| {
                let mut state = TripleState::from_coordinates(0.0, 0.0, 0.0, 0.0);
                run_triple_to(&mut state, t_end, 0.01, &mut rng).unwrap();
                state.g
            })
            .collect();
        let summary = MeanStderr::from_samples(&samples);
        assert!(
            (summary.mean - 10.0 * t_end).abs() < 3.0 * summary.stderr,
            "mean {} ± {} vs {}",
            summary.mean,
            summary.stderr,
            10.0 * t_end
        );
    }

    /// The Euler-dominant and exact-dominant regimes agree on the mean.
    #[test]
    fn euler_and_exact_substeps_agree() {
        let mut rng = derive_stream(71, 1);
        let replicas = 20_000;
        let t_end = 0.5;
        let run = |dt: f64, rng: &mut _| -> Vec<f64> {
            (0..replicas)
                .map(|_| {
                    let mut state = TripleState::from_coordinates(0.0, 0.0, 0.0, 0.0);
                    run_triple_to(&mut state, t_end, dt, rng).unwrap();
                    state.d
                })
                .collect()
        };
        // dt = 1e-3 puts the exact zone at 0.4, so most of the trajectory
        // (D ≈ 5t ≥ 0.4 past t = 0.08) runs on Euler steps; dt = 0.05 puts
        // it at 20, far above any value reached by t = 0.5, so every step
        // is an exact transition.
        let euler_heavy = MeanStderr::from_samples(&run(1e-3, &mut rng));
        let exact_only = MeanStderr::from_samples(&run(0.05, &mut rng));
        let gap = (euler_heavy.mean - exact_only.mean).abs();
        let combined = euler_heavy.stderr.hypot(exact_only.stderr);
        assert!(
            gap < 4.0 * combined,
            "means {} vs {} differ by {} (combined se {})",
            euler_heavy.mean,
            exact_only.mean,
            gap,
            combined
        );
        assert!(
            (exact_only.mean - 10.0 * t_end).abs() < 3.0 * exact_only.stderr,
            "exact-regime mean {} vs {}",
            exact_only.mean,
            10.0 * t_end
        );
    }

    /// log Δ grows like (1/2) log t over two decades.
    #[test]
    fn spread_exponent_is_one_half() {
        let mut rng = derive_stream(71, 2);
        let replicas = 200;
        let checkpoints = [10.0, 100.0, 1000.0];
        let mut log_delta_sums = [0.0f64; 3];
        for _ in 0..replicas {
            let mut state = TripleState::from_coordinates(0.0, 0.0, 0.0, 0.0);
            for (i, &t_star) in checkpoints.iter().enumerate() {
                while state.t < t_star {
                    let delta2 = state.delta().powi(2);
                    let dt = (1e-3 * delta2.max(1e-4)).min(t_star - state.t);
                    step_triple(&mut state, dt, &mut rng).unwrap();
                }
                log_delta_sums[i] += state.delta().ln();
            }
        }
        let n = replicas as f64;
        let xs: Vec<f64> = checkpoints.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = log_delta_sums.iter().map(|s| s / n).collect();
        let x_mean = xs.iter().sum::<f64>() / 3.0;
        let y_mean = ys.iter().sum::<f64>() / 3.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - x_mean) * (y - y_mean))
            .sum::<f64>()
            / xs.iter().map(|x| (x - x_mean).powi(2)).sum::<f64>();
        assert!(
            (slope - 0.5).abs() < 0.05,
            "log-spread slope {slope} vs 1/2"
        );
    }

    /// A vanishing step leaves a marked point essentially in place.
    #[test]
    fn marked_point_is_still_under_vanishing_step() {
        let mut rng = derive_stream(71, 3);
        let mut state = TripleState::new(&[2.0]).unwrap();
        step_triple(&mut state, 1e-12, &mut rng).unwrap();
        let moved = (state.alive()[0].position - 2.0).abs();
        assert!(moved < 1e-9, "position moved by {moved}");
    }

    /// Swallow order follows position order, swallowed points stay
    /// swallowed, and alive points always clear the right hull edge.
    #[test]
    fn swallow_bookkeeping_is_consistent() {
        for seed in 0..20 {
            let mut rng = derive_stream(72, seed);
            let mut state = TripleState::new(&[0.5, 1.0, 2.0]).unwrap();
            let mut steps = 0u64;
            while !state.alive().is_empty() {
                let delta2 = state.delta().powi(2);
                let dt = 1e-4 * delta2.max(1e-4);
                step_triple(&mut state, dt, &mut rng).unwrap();
                steps += 1;
                assert!(steps < 50_000_000, "runaway trajectory at seed {seed}");
                for m in state.alive() {
                    let gap = m.position - state.u;
                    assert!(
                        gap - state.d.sqrt() > SWALLOW_TOL * gap,
                        "alive point inside the hull at seed {seed}"
                    );
                }
            }
            let times: Vec<f64> = state.swallowed().iter().map(|s| s.time).collect();
            let labels: Vec<u32> = state.swallowed().iter().map(|s| s.label).collect();
            assert_eq!(labels, vec![0, 1, 2], "swallow order at seed {seed}");
            assert!(
                times.windows(2).all(|w| w[0] <= w[1]),
                "swallow times decreased at seed {seed}"
            );
            assert!(times.iter().all(|&t| t <= state.t));
        }
    }

    /// The reference target itself always reports count 1.
    #[test]
    fn commuting_count_at_the_reference_is_one() {
        for seed in 0..5 {
            let mut rng = derive_stream(73, seed);
            let samples = comsle_direct(&[1.0], 1e-4, 100_000_000, &mut rng).unwrap();
            assert_eq!(samples[0].count, 1, "seed {seed}");
        }
    }

    /// Counts are odd and nondecreasing in the target.
    #[test]
    fn commuting_counts_are_odd_and_ordered() {
        let e = std::f64::consts::E;
        for seed in 0..10 {
            let mut rng = derive_stream(73, 100 + seed);
            let samples = comsle_direct(&[e, e * e], 1e-4, 100_000_000, &mut rng).unwrap();
            for s in &samples {
                assert_eq!(s.count % 2, 1, "even count at seed {seed}");
            }
            assert!(
                samples[1].count >= samples[0].count,
                "counts out of order at seed {seed}"
            );
        }
    }

    /// Mean counts grow roughly linearly in log x with a slope in the
    /// admissible pre-asymptotic window.
    #[test]
    fn commuting_count_slope_is_in_window() {
        let mut rng = derive_stream(73, 200);
        let targets = [3.0f64.exp(), 4.0f64.exp(), 5.0f64.exp()];
        let replicas = 300;
        let mut sums = [0.0f64; 3];
        for _ in 0..replicas {
            let samples = comsle_direct(&targets, 1e-4, 100_000_000, &mut rng).unwrap();
            for (i, s) in samples.iter().enumerate() {
                sums[i] += s.count as f64;
            }
        }
        let xs = [3.0f64, 4.0, 5.0];
        let ys: Vec<f64> = sums.iter().map(|s| s / replicas as f64).collect();
        let x_mean = 4.0;
        let y_mean = ys.iter().sum::<f64>() / 3.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - x_mean) * (y - y_mean))
            .sum::<f64>()
            / xs.iter().map(|x| (x - x_mean).powi(2)).sum::<f64>();
        assert!(
            (0.1..=0.5).contains(&slope),
            "slope {slope} outside the pre-asymptotic window, means {ys:?}"
        );
    }

    /// Argument validation: bad targets and bad steps are refused.
    #[test]
    fn rejects_bad_arguments() {
        let mut rng = derive_stream(73, 300);
        assert!(comsle_direct(&[0.5], 1e-4, 1_000, &mut rng).is_err());
        assert!(comsle_direct(&[500.0], 1e-4, 1_000, &mut rng).is_err());
        assert!(comsle_direct(&[2.0], -1.0, 1_000, &mut rng).is_err());
        assert!(TripleState::new(&[-1.0]).is_err());
        let mut state = TripleState::from_coordinates(0.0, 0.0, 0.0, 0.0);
        assert!(step_triple(&mut state, 0.0, &mut rng).is_err());
    }

    /// A tiny budget reports exhaustion rather than spinning.
    #[test]
    fn budget_exhaustion_is_reported() {
        let mut rng = derive_stream(73, 301);
        match comsle_direct(&[2.0], 1e-4, 10, &mut rng) {
            Err(TripleError::BudgetExhausted { steps, pending }) => {
                assert_eq!(steps, 10);
                assert!(pending >= 1);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }
}
