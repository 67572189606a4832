//! Log-time backend: the normalized interface position Z ∈ [0, 1].
//!
//! After the time change dr = dt/Δ² the position Z = √G/(√G + √D) becomes
//! an autonomous diffusion
//!
//! ```text
//! dZ = √6 dB_r + 2 (1/Z − 1/(1−Z)) dr,
//! ```
//!
//! whose boundary visits are exactly the hull's touches of ℝ₋ (Z = 0) and
//! ℝ₊ (Z = 1). The physical clock is reconstructed on the side through the
//! additive functionals
//!
//! ```text
//! logΔ(r) = ∫₀ʳ 2 du / (Z(1−Z)),        t(r) = 1 + ∫₀ʳ e^{2·logΔ(u)} du,
//! ```
//!
//! the latter kept in a log-space accumulator because t grows by a factor
//! e^{7.26} per alternated hit and overflows f64 after a few dozen.
//!
//! Stepping is adaptive: in the bulk, Euler steps of size ∝ (Z(1−Z))² keep
//! the per-step noise a few percent of the distance to the boundary; below
//! the handoff Z²/6 < 1e-4 (and its mirror image) the squared coordinate
//! W = Z²/6 is exactly a squared Bessel process of dimension 5/3 in r, so
//! the stepper advances it by the exact transition and detects boundary
//! hits by the exact first-passage probability — thresholding alone would
//! systematically miss excursions that touch and return inside a step.
//! Hits only count when they land on the side the alternation expects.

use std::io::{self, Write};

use peelab_numerics::dist::{besq_bridge_no_touch_prob, besq_step};
use peelab_numerics::rng::open01;
use peelab_numerics::{LogAccumulator, MeanStderr};
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::measures::sample_rho;

/// Squared-Bessel dimension of W = Z²/6 near either boundary.
const BOUNDARY_DIM: f64 = 5.0 / 3.0;
/// Exact-transition handoff: W = Z²/6 below this runs on exact substeps.
const BOUNDARY_W: f64 = 1e-4;
/// Functional evaluations clamp Z into [EPS, 1−EPS]; the excursions below
/// 1e-5 carry ~0.03% of the visit-rate integral, far under the tolerances.
const CLAMP_EPS: f64 = 1e-5;

/// Errors from the log-time backend.
#[derive(Debug, Error)]
pub enum LogTimeError {
    #[error("interface position must lie in [0, 1], got {0}")]
    BadPosition(f64),
    #[error(
        "substep budget exhausted after {steps} substeps at r = {r} with {hits} alternated hits"
    )]
    BudgetExhausted { steps: u64, r: f64, hits: u64 },
}

/// Step-size policy of the adaptive stepper. The defaults are calibrated
/// against the closed-form anchors (mean 0→1 crossing time π/(7√3), visit
/// rate 7): see the module tests.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Bulk Euler step is dr_scale · (Z(1−Z))².
    pub dr_scale: f64,
    /// Hard cap on any bulk step.
    pub dr_max: f64,
    /// Hard floor on any bulk step.
    pub dr_floor: f64,
    /// Fixed step inside the exact boundary zones.
    pub dr_zone: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            dr_scale: 2e-4,
            dr_max: 1e-3,
            dr_floor: 1e-9,
            dr_zone: 1e-6,
        }
    }
}

/// One alternated boundary hit.
#[derive(Debug, Clone, Copy)]
pub struct HitEvent {
    /// Position in the alternated chain, starting at 1.
    pub index: u64,
    /// 0 for the left boundary (Z = 0), 1 for the right (Z = 1).
    pub side: u8,
    /// r-time of the hit.
    pub r: f64,
    /// log of the physical time of the hit.
    pub log_t: f64,
}

/// The log-time state: position, r-clock, and the two log functionals.
#[derive(Debug, Clone)]
pub struct LogTimeState {
    z: f64,
    r: f64,
    log_delta: f64,
    log_t: LogAccumulator,
    /// The boundary the alternation will count next; `None` accepts either
    /// side for the first hit.
    next_side: Option<u8>,
    hits: u64,
}

impl LogTimeState {
    /// State at position `z0` whose first counted hit may land on either
    /// boundary.
    pub fn from_position(z0: f64) -> Result<Self, LogTimeError> {
        if !(0.0..=1.0).contains(&z0) {
            return Err(LogTimeError::BadPosition(z0));
        }
        Ok(LogTimeState {
            z: z0,
            r: 0.0,
            log_delta: 0.0,
            log_t: LogAccumulator::from_log(0.0),
            next_side: None,
            hits: 0,
        })
    }

    /// State at position `z0` that only counts hits of the given boundary
    /// first (hits of the other side are ignored until then).
    pub fn watching(z0: f64, side: u8) -> Result<Self, LogTimeError> {
        let mut state = Self::from_position(z0)?;
        state.next_side = Some(side);
        Ok(state)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// logΔ(r) − logΔ(0) = ∫₀ʳ 2 du/(Z(1−Z)), nondecreasing.
    pub fn log_delta(&self) -> f64 {
        self.log_delta
    }

    /// log t(r) with t(r) = 1 + ∫₀ʳ e^{2 logΔ}, nondecreasing from 0.
    pub fn log_t(&self) -> f64 {
        self.log_t.log_value()
    }

    /// The boundary the alternation expects next, if fixed yet.
    pub fn hit_parity(&self) -> Option<u8> {
        self.next_side
    }

    /// Number of counted (alternated) hits so far.
    pub fn hits(&self) -> u64 {
        self.hits
    }
}

/// Drift coefficient of Z, zero at the midpoint by symmetry.
fn drift(z: f64) -> f64 {
    2.0 * (1.0 / z - 1.0 / (1.0 - z))
}

/// Integrand of the logΔ functional, clamped near the boundaries.
fn inverse_gap(z: f64) -> f64 {
    let z = z.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
    2.0 / (z * (1.0 - z))
}

/// One adaptive substep, at most `dr_cap` of r-time. Returns the counted
/// hit, if the step produced one.
fn substep(
    state: &mut LogTimeState,
    rng: &mut impl RngCore,
    ctl: &StepControl,
    dr_cap: f64,
) -> Option<HitEvent> {
    let z = state.z;
    let w_lower = z * z / 6.0;
    let upper = 1.0 - z;
    let w_upper = upper * upper / 6.0;

    let (dr, z_next, hit_side): (f64, f64, Option<u8>) = if w_lower < BOUNDARY_W {
        // Exact squared-Bessel substep on W = Z²/6; the drift term from the
        // far boundary, −2dr/(1−Z), is applied as a correction shift. The
        // boundary visit is decided from both endpoints (bridge no-touch
        // probability): deciding from the start value alone is independent
        // of where the path lands, and chaining such draws across substeps
        // systematically converts near-misses into recorded hits.
        let dr = ctl.dr_zone.min(dr_cap);
        let w_next = besq_step(rng, w_lower, BOUNDARY_DIM, dr).expect("validated arguments");
        let p_no = besq_bridge_no_touch_prob(w_lower, w_next, BOUNDARY_DIM, dr);
        let touched = p_no <= 0.0 || open01(rng) >= p_no;
        let z_next = ((6.0 * w_next).sqrt() - 2.0 * dr / (1.0 - z)).max(0.0);
        (dr, z_next, touched.then_some(0))
    } else if w_upper < BOUNDARY_W {
        // Mirror image: Y = 1 − Z has the same dynamics.
        let dr = ctl.dr_zone.min(dr_cap);
        let w_next = besq_step(rng, w_upper, BOUNDARY_DIM, dr).expect("validated arguments");
        let p_no = besq_bridge_no_touch_prob(w_upper, w_next, BOUNDARY_DIM, dr);
        let touched = p_no <= 0.0 || open01(rng) >= p_no;
        let y_next = ((6.0 * w_next).sqrt() - 2.0 * dr / (1.0 - upper)).max(0.0);
        (dr, 1.0 - y_next, touched.then_some(1))
    } else {
        // Bulk Euler step, sized so the noise stays a few percent of the
        // distance to the nearer boundary.
        let dr = (ctl.dr_scale * (z * upper).powi(2))
            .clamp(ctl.dr_floor, ctl.dr_max)
            .min(dr_cap);
        let noise: f64 = StandardNormal.sample(rng);
        let mut z_next = z + (6.0 * dr).sqrt() * noise + drift(z) * dr;
        let mut hit = None;
        if z_next <= 0.0 {
            hit = Some(0);
            z_next = -z_next;
        } else if z_next >= 1.0 {
            hit = Some(1);
            z_next = 2.0 - z_next;
        } else {
            // One-sided Brownian-bridge correction: the probability that
            // the driving noise grazed a boundary between two interior
            // endpoints is exp(−a·b/(3dr)). Skipped (it is below 4e-18)
            // unless the product is within 40 · (3dr).
            let lower_product = z * z_next;
            let upper_product = upper * (1.0 - z_next);
            if lower_product < 120.0 * dr && open01(rng) < (-lower_product / (3.0 * dr)).exp() {
                hit = Some(0);
            } else if upper_product < 120.0 * dr
                && open01(rng) < (-upper_product / (3.0 * dr)).exp()
            {
                hit = Some(1);
            }
        }
        (dr, z_next, hit)
    };

    // Trapezoid update of logΔ, and of log t through the midpoint value.
    let increment = 0.5 * dr * (inverse_gap(z) + inverse_gap(z_next));
    state
        .log_t
        .add_log(dr.ln() + 2.0 * (state.log_delta + 0.5 * increment));
    state.log_delta += increment;
    state.r += dr;
    state.z = z_next;

    let side = hit_side?;
    let counted = state.next_side.is_none_or(|expected| expected == side);
    if !counted {
        return None;
    }
    state.hits += 1;
    state.next_side = Some(1 - side);
    Some(HitEvent {
        index: state.hits,
        side,
        r: state.r,
        log_t: state.log_t.log_value(),
    })
}

/// Advances the state by exactly `dr` of r-time under the given policy,
/// collecting any counted hits along the way.
pub fn step_z_with(
    state: &mut LogTimeState,
    dr: f64,
    rng: &mut impl RngCore,
    ctl: &StepControl,
) -> Vec<HitEvent> {
    assert!(dr > 0.0 && dr.is_finite(), "r-increment must be positive");
    let r_end = state.r + dr;
    let mut events = Vec::new();
    while state.r < r_end {
        let remaining = r_end - state.r;
        // A remainder below the f64 resolution of r_end cannot advance the
        // clock any further; stop instead of spinning.
        if remaining <= r_end.abs() * 1e-15 {
            break;
        }
        if let Some(event) = substep(state, rng, ctl, remaining) {
            events.push(event);
        }
    }
    events
}

/// [`step_z_with`] under the default calibrated policy.
pub fn step_z(state: &mut LogTimeState, dr: f64, rng: &mut impl RngCore) -> Vec<HitEvent> {
    step_z_with(state, dr, rng, &StepControl::default())
}

/// r-time for the position to cross the interval: started at one boundary,
/// run until the first counted hit of the other.
pub fn boundary_crossing_time(rng: &mut impl RngCore, ctl: &StepControl, from_one: bool) -> f64 {
    let mut state = if from_one {
        LogTimeState::watching(1.0, 0).expect("valid position")
    } else {
        LogTimeState::watching(0.0, 1).expect("valid position")
    };
    loop {
        if let Some(event) = substep(&mut state, rng, ctl, f64::INFINITY) {
            return event.r;
        }
    }
}

/// Mean and standard error of the 0 → 1 crossing time over independent
/// replicas; the exact value is π/(7√3) ≈ 0.259114.
pub fn t1_statistics(rng: &mut impl RngCore, ctl: &StepControl, replicas: usize) -> MeanStderr {
    let samples: Vec<f64> = (0..replicas)
        .map(|_| boundary_crossing_time(rng, ctl, false))
        .collect();
    MeanStderr::from_samples(&samples)
}

/// r-time of the first hit of Z = 1 from an interior start, for matching
/// against the physical-time backend.
pub fn first_hit_of_one_from(rng: &mut impl RngCore, ctl: &StepControl, z0: f64) -> f64 {
    let mut state = LogTimeState::watching(z0, 1).expect("valid position");
    loop {
        if let Some(event) = substep(&mut state, rng, ctl, f64::INFINITY) {
            return event.r;
        }
    }
}

/// The three per-replica rate readings after n alternated hits.
#[derive(Debug, Clone, Copy)]
pub struct ThetaRateSample {
    pub n_hits: u64,
    /// r-time of the n-th counted hit.
    pub r: f64,
    /// log physical time of the n-th counted hit.
    pub log_t: f64,
}

impl ThetaRateSample {
    /// log t per hit; tends to 4π/√3 ≈ 7.2552.
    pub fn log_t_per_hit(&self) -> f64 {
        self.log_t / self.n_hits as f64
    }

    /// r per hit; tends to π/(7√3) ≈ 0.2591.
    pub fn r_per_hit(&self) -> f64 {
        self.r / self.n_hits as f64
    }

    /// log t over r; tends to 28 (the ratio of the two limits above).
    pub fn log_t_over_r(&self) -> f64 {
        self.log_t / self.r
    }
}

/// Runs one trajectory from a stationary start through `n_hits` alternated
/// hits and reads off the rate sample. The budget caps the substep count.
pub fn theta_rate(
    rng: &mut impl RngCore,
    ctl: &StepControl,
    n_hits: u64,
    budget: u64,
) -> Result<ThetaRateSample, LogTimeError> {
    assert!(n_hits >= 1, "need at least one hit");
    let z0 = sample_rho(rng);
    let mut state = LogTimeState::from_position(z0).expect("Beta draw is in range");
    let mut steps = 0u64;
    loop {
        if steps >= budget {
            return Err(LogTimeError::BudgetExhausted {
                steps,
                r: state.r,
                hits: state.hits,
            });
        }
        steps += 1;
        if let Some(event) = substep(&mut state, rng, ctl, f64::INFINITY) {
            if event.index == n_hits {
                return Ok(ThetaRateSample {
                    n_hits,
                    r: event.r,
                    log_t: event.log_t,
                });
            }
        }
    }
}

/// Time average of 1/(Z(1−Z)) over r ∈ [0, r_end] from a stationary start.
/// Equal to logΔ(r_end)/(2·r_end) by construction; tends to 7.
pub fn ergodic_inverse_gap_average(
    rng: &mut impl RngCore,
    ctl: &StepControl,
    r_end: f64,
) -> f64 {
    assert!(r_end > 0.0, "averaging window must be positive");
    let z0 = sample_rho(rng);
    let mut state = LogTimeState::from_position(z0).expect("Beta draw is in range");
    while state.r < r_end {
        let remaining = r_end - state.r;
        if remaining <= r_end * 1e-15 {
            break;
        }
        substep(&mut state, rng, ctl, remaining);
    }
    state.log_delta / (2.0 * r_end)
}

/// One sampled row of a trajectory dump.
#[derive(Debug, Clone, Copy)]
pub struct ZRow {
    pub r: f64,
    pub z: f64,
    pub log_delta: f64,
    pub log_t: f64,
}

/// Runs a trajectory to `r_end`, sampling `rows` equally spaced rows.
pub fn run_trace(
    rng: &mut impl RngCore,
    ctl: &StepControl,
    z0: f64,
    r_end: f64,
    rows: usize,
) -> Result<Vec<ZRow>, LogTimeError> {
    assert!(r_end > 0.0 && rows > 0, "need a positive window and rows");
    let mut state = LogTimeState::from_position(z0)?;
    let mut out = Vec::with_capacity(rows);
    for i in 1..=rows {
        let target = r_end * i as f64 / rows as f64;
        while state.r < target {
            let remaining = target - state.r;
            if remaining <= target * 1e-15 {
                break;
            }
            substep(&mut state, rng, ctl, remaining);
        }
        out.push(ZRow {
            r: state.r,
            z: state.z,
            log_delta: state.log_delta,
            log_t: state.log_t.log_value(),
        });
    }
    Ok(out)
}

/// Writes a trajectory as CSV with header `r,z,log_delta,log_t`. Floats use
/// the shortest round-trip representation.
pub fn write_trace_csv<W: Write>(mut out: W, rows: &[ZRow]) -> io::Result<()> {
    writeln!(out, "r,z,log_delta,log_t")?;
    for row in rows {
        writeln!(out, "{},{},{},{}", row.r, row.z, row.log_delta, row.log_t)?;
    }
    Ok(())
}

/// Writes counted hits as CSV with header `index,side,r,log_t`.
pub fn write_touch_log_csv<W: Write>(mut out: W, events: &[HitEvent]) -> io::Result<()> {
    writeln!(out, "index,side,r,log_t")?;
    for e in events {
        writeln!(out, "{},{},{},{}", e.index, e.side, e.r, e.log_t)?;
    }
    Ok(())
}
