//! Horodistance walks driven by the one-step peeling law.
//!
//! Each step splits in two: the form increment (Δ⁺, Δ⁻) lands at the
//! half-integer time i+½, then the exploration policy's offset (η⁺, η⁻)
//! with η⁺ + η⁻ = 0 completes the full step. All bookkeeping is exact on
//! doubled integers. Running minima are taken over the half-step values
//! (and the starting 0), which is the resolution at which boundary edges
//! are swallowed.
//!
//! A serialized walk row (form, jump size, full-step increments, η⁺) fully
//! determines both the walk step and the matching boundary-ledger
//! transition, so one CSV schema covers both replay uses.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand_core::RngCore;

use crate::form::{delta_minus, delta_plus, Form};
use crate::halfint::HalfInt;
use crate::sampler::{shared_sampler, FormSampler};

/// Exploration policies: how the next edge to peel is chosen, which only
/// matters on Center steps (elsewhere the choice is forced).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyId {
    /// Stays as close as possible to the predicted next edge: the ±½
    /// offsets on Center steps alternate so their running sum never
    /// leaves {0, +½}. Default for pure walk statistics.
    PredictedEdge,
    /// Fair color coin on each Center: white (ε = +½) moves the cursor to
    /// the left fresh edge, black to the right; η⁺ = +ε, η⁻ = −ε.
    Percolation,
    /// Always peels the leftmost exposed edge (η⁺ = +½ on every Center).
    /// Carries a linear drift; useful as an adversarial fuzz policy.
    LeftmostExposed,
}

impl PolicyId {
    pub const ALL: [PolicyId; 3] = [
        PolicyId::PredictedEdge,
        PolicyId::Percolation,
        PolicyId::LeftmostExposed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyId::PredictedEdge => "predicted-edge",
            PolicyId::Percolation => "percolation",
            PolicyId::LeftmostExposed => "leftmost-exposed",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyId {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, WalkError> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| WalkError::UnknownPolicy(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WalkError {
    #[error("unknown policy `{0}` (expected predicted-edge, percolation, or leftmost-exposed)")]
    UnknownPolicy(String),
    #[error("rescale window n = {n} exceeds walk length {len}")]
    RescaleTooLong { n: usize, len: usize },
}

/// Everything produced by one walk step, on doubled integers.
#[derive(Clone, Copy, Debug)]
pub struct StepEvent {
    /// 0-based step number; the step maps time i to i+1.
    pub index: u64,
    pub form: Form,
    /// On Center: whether the cursor moved to the left fresh edge
    /// (equivalently η⁺ = +½). Meaningless (false) on jumps.
    pub center_left_choice: bool,
    /// 2·η⁺ ∈ {−1, 0, +1}; η⁻ = −η⁺ always.
    pub eta_plus_doubled: i8,
    /// 2·ℋ⁺(i+½) and 2·ℋ⁺(i+1); same for the minus coordinate.
    pub h_plus_half_doubled: i64,
    pub h_plus_doubled: i64,
    pub h_minus_half_doubled: i64,
    pub h_minus_doubled: i64,
    /// Whether the half-step value hit the running minimum (ties count) —
    /// the moments at which boundary edges are swallowed.
    pub new_plus_record: bool,
    pub new_minus_record: bool,
    /// Running minima 2·ℋ̲±(i) after this step (≤ 0 by convention).
    pub min_plus_doubled: i64,
    pub min_minus_doubled: i64,
}

/// Streaming walk generator; state lives on doubled integers so arbitrary
/// lengths stay exact. One instance per replica; the RNG stream is owned.
pub struct WalkEngine<R: RngCore> {
    sampler: &'static FormSampler,
    rng: R,
    policy: PolicyId,
    steps: u64,
    h_plus_doubled: i64,
    h_minus_doubled: i64,
    min_plus_doubled: i64,
    min_minus_doubled: i64,
    /// Alternation state for the predicted-edge policy.
    next_center_left: bool,
}

impl<R: RngCore> WalkEngine<R> {
    pub fn new(policy: PolicyId, rng: R) -> Self {
        WalkEngine {
            sampler: shared_sampler(),
            rng,
            policy,
            steps: 0,
            h_plus_doubled: 0,
            h_minus_doubled: 0,
            min_plus_doubled: 0,
            min_minus_doubled: 0,
            next_center_left: true,
        }
    }

    pub fn policy(&self) -> PolicyId {
        self.policy
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn h_plus(&self) -> HalfInt {
        HalfInt::from_doubled(self.h_plus_doubled)
    }

    pub fn h_minus(&self) -> HalfInt {
        HalfInt::from_doubled(self.h_minus_doubled)
    }

    pub fn min_plus_doubled(&self) -> i64 {
        self.min_plus_doubled
    }

    pub fn min_minus_doubled(&self) -> i64 {
        self.min_minus_doubled
    }

    /// Draws one form and advances the walk.
    pub fn step(&mut self) -> StepEvent {
        let draw = self.sampler.sample(&mut self.rng);
        let choice_left = match (self.policy, draw.form) {
            (PolicyId::PredictedEdge, Form::Center) => {
                let c = self.next_center_left;
                self.next_center_left = !c;
                c
            }
            (PolicyId::Percolation, Form::Center) => draw.coin,
            (PolicyId::LeftmostExposed, Form::Center) => true,
            _ => false,
        };
        self.advance(draw.form, choice_left)
    }

    /// Applies one explicit (form, choice) step — the deterministic core of
    /// `step`, also used to replay recorded or hand-built walks.
    pub fn advance(&mut self, form: Form, center_left_choice: bool) -> StepEvent {
        let half_plus = self.h_plus_doubled + delta_plus(form).doubled();
        let half_minus = self.h_minus_doubled + delta_minus(form).doubled();

        let new_plus_record = half_plus <= self.min_plus_doubled;
        let new_minus_record = half_minus <= self.min_minus_doubled;
        self.min_plus_doubled = self.min_plus_doubled.min(half_plus);
        self.min_minus_doubled = self.min_minus_doubled.min(half_minus);

        let eta_plus_doubled: i8 = match form {
            Form::Center => {
                if center_left_choice {
                    1
                } else {
                    -1
                }
            }
            _ => 0,
        };
        self.h_plus_doubled = half_plus + eta_plus_doubled as i64;
        self.h_minus_doubled = half_minus - eta_plus_doubled as i64;

        let index = self.steps;
        self.steps += 1;
        StepEvent {
            index,
            form,
            center_left_choice: matches!(form, Form::Center) && center_left_choice,
            eta_plus_doubled,
            h_plus_half_doubled: half_plus,
            h_plus_doubled: self.h_plus_doubled,
            h_minus_half_doubled: half_minus,
            h_minus_doubled: self.h_minus_doubled,
            new_plus_record,
            new_minus_record,
            min_plus_doubled: self.min_plus_doubled,
            min_minus_doubled: self.min_minus_doubled,
        }
    }
}

/// A materialized walk in column form. `h_*_doubled[i]` is the value after
/// the full step i (time i+1); time-0 values are 0 by convention.
pub struct HorodistanceWalk {
    pub policy: PolicyId,
    pub forms: Vec<Form>,
    pub eta_plus_doubled: Vec<i8>,
    pub h_plus_doubled: Vec<i64>,
    pub h_minus_doubled: Vec<i64>,
}

impl HorodistanceWalk {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// 2·ℋ⁺(i) at the integer time i ∈ 0..=len.
    pub fn h_plus_at_doubled(&self, time: usize) -> i64 {
        if time == 0 {
            0
        } else {
            self.h_plus_doubled[time - 1]
        }
    }

    pub fn h_minus_at_doubled(&self, time: usize) -> i64 {
        if time == 0 {
            0
        } else {
            self.h_minus_doubled[time - 1]
        }
    }

    /// 2·ℋ⁺(i+½) for step i: previous full value plus the form increment.
    pub fn h_plus_half_doubled(&self, i: usize) -> i64 {
        self.h_plus_at_doubled(i) + delta_plus(self.forms[i]).doubled()
    }

    pub fn h_minus_half_doubled(&self, i: usize) -> i64 {
        self.h_minus_at_doubled(i) + delta_minus(self.forms[i]).doubled()
    }

    /// 2·Ση⁺ over all steps.
    pub fn eta_plus_sum_doubled(&self) -> i64 {
        self.eta_plus_doubled.iter().map(|&e| e as i64).sum()
    }

    /// 2·Σ Δ⁺: the pure form-increment walk, with policy offsets removed.
    pub fn delta_plus_sum_doubled(&self) -> i64 {
        self.h_plus_at_doubled(self.len()) - self.eta_plus_sum_doubled()
    }

    pub fn delta_minus_sum_doubled(&self) -> i64 {
        self.h_minus_at_doubled(self.len()) + self.eta_plus_sum_doubled()
    }

    /// Writes the documented CSV schema:
    /// `i,form_kind,k,dH_plus_doubled,dH_minus_doubled,eta_plus_doubled`
    /// with full-step increments and k = 0 on Center rows.
    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(
            out,
            "i,form_kind,k,dH_plus_doubled,dH_minus_doubled,eta_plus_doubled"
        )?;
        for i in 0..self.len() {
            let form = self.forms[i];
            let dh_p = self.h_plus_at_doubled(i + 1) - self.h_plus_at_doubled(i);
            let dh_m = self.h_minus_at_doubled(i + 1) - self.h_minus_at_doubled(i);
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i,
                form.kind_code(),
                form.jump().unwrap_or(0),
                dh_p,
                dh_m,
                self.eta_plus_doubled[i]
            )?;
        }
        Ok(())
    }
}

/// Runs a fresh walk of `n` steps under the given policy.
pub fn run_walk<R: RngCore>(n: usize, policy: PolicyId, rng: R) -> HorodistanceWalk {
    let mut engine = WalkEngine::new(policy, rng);
    let mut walk = HorodistanceWalk {
        policy,
        forms: Vec::with_capacity(n),
        eta_plus_doubled: Vec::with_capacity(n),
        h_plus_doubled: Vec::with_capacity(n),
        h_minus_doubled: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let ev = engine.step();
        walk.forms.push(ev.form);
        walk.eta_plus_doubled.push(ev.eta_plus_doubled);
        walk.h_plus_doubled.push(ev.h_plus_doubled);
        walk.h_minus_doubled.push(ev.h_minus_doubled);
    }
    walk
}

/// The diffusively rescaled pair t ↦ 3^{2/3}·n^{−2/3}·(ℋ⁺(⌊nt⌋), ℋ⁻(⌊nt⌋)),
/// normalized so both coordinates converge to the standard spectrally
/// negative 3/2-stable process.
pub struct RescaledWalk<'a> {
    walk: &'a HorodistanceWalk,
    n: usize,
    scale: f64,
}

impl RescaledWalk<'_> {
    /// Evaluates the rescaled pair at t ∈ [0, 1].
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let m = ((self.n as f64 * t).floor() as usize).min(self.n);
        (
            self.scale * 0.5 * self.walk.h_plus_at_doubled(m) as f64,
            self.scale * 0.5 * self.walk.h_minus_at_doubled(m) as f64,
        )
    }

    pub fn endpoint(&self) -> (f64, f64) {
        self.eval(1.0)
    }
}

pub fn rescale_walk(walk: &HorodistanceWalk, n: usize) -> Result<RescaledWalk<'_>, WalkError> {
    if n > walk.len() {
        return Err(WalkError::RescaleTooLong { n, len: walk.len() });
    }
    let scale = 3f64.powf(2.0 / 3.0) * (n as f64).powf(-2.0 / 3.0);
    Ok(RescaledWalk { walk, n, scale })
}
