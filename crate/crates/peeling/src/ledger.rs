//! Boundary ledger: an explicit edge-level model of the exploration
//! frontier, used as an independent oracle for the horodistance walk.
//!
//! The boundary is an infinite line of labeled edges. Only a finite window
//! around the activity is materialized: Original edges outside the window
//! exist implicitly and are brought in lazily when consumed. Each peeling
//! step removes the cursor edge and, depending on the form, either exposes
//! two fresh edges (Center) or consumes a stretch of boundary on one side
//! and exposes a single fresh edge (Left/Right). Original edges consumed on
//! a side — not the peeled edge itself — are "swallowed" and never return.
//!
//! The horodistance of the cursor edge is read off the ledger geometry
//! alone (window counts and swallow totals), giving a cross-check of the
//! incremental walk that shares no arithmetic with it.

use std::collections::VecDeque;

use crate::form::Form;
use crate::halfint::HalfInt;

/// A boundary edge: part of the initial boundary (root edge is
/// `Original(0)`, positive indices to its right) or exposed during the
/// exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Original(i64),
    Fresh(u64),
}

/// Original edges consumed by one step, excluding the peeled edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SwallowReport {
    /// Indices ≤ −1, in consumption order (moving leftward).
    pub left: Vec<i64>,
    /// Indices ≥ 1, in consumption order (moving rightward).
    pub right: Vec<i64>,
}

#[derive(Debug, thiserror::Error)]
pub enum LedgerError {
    #[error("cursor points at no surviving edge (already swallowed)")]
    PeeledEdgeGone,
}

pub struct BoundaryLedger {
    /// Materialized stretch of the boundary, leftmost first.
    window: VecDeque<Label>,
    /// Index into `window` of the next edge to peel.
    cursor: usize,
    /// Most negative / most positive Original index not yet consumed.
    left_next: i64,
    right_next: i64,
    next_fresh_id: u64,
    swallowed_left: u64,
    swallowed_right: u64,
}

impl Default for BoundaryLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl BoundaryLedger {
    /// A fresh ledger: cursor on the root edge, nothing swallowed.
    pub fn new() -> Self {
        let mut window = VecDeque::new();
        window.push_back(Label::Original(0));
        BoundaryLedger {
            window,
            cursor: 0,
            left_next: -1,
            right_next: 1,
            next_fresh_id: 0,
            swallowed_left: 0,
            swallowed_right: 0,
        }
    }

    pub fn swallowed_left(&self) -> u64 {
        self.swallowed_left
    }

    pub fn swallowed_right(&self) -> u64 {
        self.swallowed_right
    }

    pub fn cursor_label(&self) -> Label {
        self.window[self.cursor]
    }

    /// Materialized window, for inspection.
    pub fn window(&self) -> impl Iterator<Item = Label> + '_ {
        self.window.iter().copied()
    }

    /// Net change of the boundary length since the start (each step adds
    /// the exposed edges and removes the peeled and swallowed ones).
    pub fn boundary_growth(&self) -> i64 {
        self.window.len() as i64 - 1 - (self.swallowed_left + self.swallowed_right) as i64
    }

    fn fresh(&mut self) -> Label {
        let id = self.next_fresh_id;
        self.next_fresh_id += 1;
        Label::Fresh(id)
    }

    /// Applies one peeling step. `center_left_choice` selects which of the
    /// two exposed edges the cursor moves to on a Center step (`true` =
    /// left); it is ignored on jumps, where the exposed edge is unique.
    pub fn apply(
        &mut self,
        form: Form,
        center_left_choice: bool,
    ) -> Result<SwallowReport, LedgerError> {
        if self.cursor >= self.window.len() {
            return Err(LedgerError::PeeledEdgeGone);
        }
        let mut report = SwallowReport::default();
        // The peeled edge leaves the boundary but is revealed, not swallowed.
        self.window.remove(self.cursor);
        match form {
            Form::Center => {
                let f_left = self.fresh();
                let f_right = self.fresh();
                self.window.insert(self.cursor, f_right);
                self.window.insert(self.cursor, f_left);
                if !center_left_choice {
                    self.cursor += 1;
                }
            }
            Form::Right(k) => {
                for _ in 0..k {
                    if self.cursor < self.window.len() {
                        if let Label::Original(j) = self.window.remove(self.cursor).unwrap() {
                            self.swallowed_right += 1;
                            report.right.push(j);
                        }
                    } else {
                        report.right.push(self.right_next);
                        self.right_next += 1;
                        self.swallowed_right += 1;
                    }
                }
                let f = self.fresh();
                self.window.insert(self.cursor, f);
            }
            Form::Left(k) => {
                for _ in 0..k {
                    if self.cursor > 0 {
                        self.cursor -= 1;
                        if let Label::Original(j) = self.window.remove(self.cursor).unwrap() {
                            self.swallowed_left += 1;
                            report.left.push(j);
                        }
                    } else {
                        report.left.push(self.left_next);
                        self.left_next -= 1;
                        self.swallowed_left += 1;
                    }
                }
                let f = self.fresh();
                self.window.insert(self.cursor, f);
            }
        }
        Ok(report)
    }

    /// Reads (ℋ⁺, ℋ⁻) of the cursor edge from the ledger geometry: scan
    /// from the cursor outward; each side's horodistance is the number of
    /// materialized edges passed before reaching the first surviving
    /// Original edge, minus the Original edges swallowed on that side.
    pub fn horodistance_oracle(&self) -> (HalfInt, HalfInt) {
        if let Label::Original(_) = self.window[self.cursor] {
            // Cursor sits on the initial boundary itself: the root position.
            return (HalfInt::ZERO, HalfInt::ZERO);
        }
        let mut passed_right = 0i64;
        for i in self.cursor + 1..self.window.len() {
            if matches!(self.window[i], Label::Original(_)) {
                break;
            }
            passed_right += 1;
        }
        let mut passed_left = 0i64;
        for i in (0..self.cursor).rev() {
            if matches!(self.window[i], Label::Original(_)) {
                break;
            }
            passed_left += 1;
        }
        (
            HalfInt::from_int(passed_right - self.swallowed_right as i64),
            HalfInt::from_int(passed_left - self.swallowed_left as i64),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{delta_minus, delta_plus};
    use crate::walk::{PolicyId, WalkEngine};
    use peelab_numerics::rng::derive_stream;

    #[test]
    fn fresh_ledger_is_at_the_root() {
        let ledger = BoundaryLedger::new();
        assert_eq!(ledger.horodistance_oracle(), (HalfInt::ZERO, HalfInt::ZERO));
        assert_eq!(ledger.boundary_growth(), 0);
        assert_eq!(ledger.cursor_label(), Label::Original(0));
    }

    #[test]
    fn right_one_swallows_the_first_right_original() {
        let mut ledger = BoundaryLedger::new();
        let report = ledger.apply(Form::Right(1), false).unwrap();
        assert_eq!(report.right, vec![1]);
        assert!(report.left.is_empty());
        assert_eq!(ledger.swallowed_right(), 1);
        let (hp, hm) = ledger.horodistance_oracle();
        assert_eq!(hp, HalfInt::from_int(-1));
        assert_eq!(hm, HalfInt::ZERO);
    }

    #[test]
    fn center_swallows_nothing_and_grows_the_boundary() {
        let mut ledger = BoundaryLedger::new();
        let report = ledger.apply(Form::Center, true).unwrap();
        assert_eq!(report, SwallowReport::default());
        assert_eq!(ledger.boundary_growth(), 1);
        assert_eq!(ledger.horodistance_oracle(), (HalfInt::ONE, HalfInt::ZERO));

        let mut ledger = BoundaryLedger::new();
        ledger.apply(Form::Center, false).unwrap();
        assert_eq!(ledger.horodistance_oracle(), (HalfInt::ZERO, HalfInt::ONE));
    }

    #[test]
    fn single_step_oracle_reproduces_full_step_increments() {
        // Frozen convention check: on a one-step ledger the oracle must
        // equal Δ± plus the policy offset for every form and choice.
        let mut cases: Vec<(Form, bool)> = vec![(Form::Center, true), (Form::Center, false)];
        for k in 1..=5 {
            cases.push((Form::Left(k), false));
            cases.push((Form::Right(k), false));
        }
        for (form, choice) in cases {
            let mut ledger = BoundaryLedger::new();
            ledger.apply(form, choice).unwrap();
            let eta_plus_doubled = match form {
                Form::Center => {
                    if choice {
                        1
                    } else {
                        -1
                    }
                }
                _ => 0,
            };
            let want_plus = delta_plus(form).doubled() + eta_plus_doubled;
            let want_minus = delta_minus(form).doubled() - eta_plus_doubled;
            let (hp, hm) = ledger.horodistance_oracle();
            assert_eq!(hp.doubled(), want_plus, "{form:?} choice {choice}");
            assert_eq!(hm.doubled(), want_minus, "{form:?} choice {choice}");
        }
    }

    #[test]
    fn oracle_tracks_walk_and_minima_count_swallowed_edges() {
        for policy in PolicyId::ALL {
            let mut engine = WalkEngine::new(policy, derive_stream(23, policy as u64));
            let mut ledger = BoundaryLedger::new();
            let steps = if matches!(policy, PolicyId::Percolation) {
                100_000
            } else {
                10_000
            };
            for _ in 0..steps {
                let ev = engine.step();
                ledger.apply(ev.form, ev.center_left_choice).unwrap();
                let (hp, hm) = ledger.horodistance_oracle();
                assert_eq!(hp.doubled(), ev.h_plus_doubled, "step {}", ev.index);
                assert_eq!(hm.doubled(), ev.h_minus_doubled, "step {}", ev.index);
                // Swallowed-edge counts are the negated running minima.
                assert_eq!(
                    ledger.swallowed_right() as i64,
                    -ev.min_plus_doubled / 2,
                    "step {}",
                    ev.index
                );
                assert_eq!(
                    ledger.swallowed_left() as i64,
                    -ev.min_minus_doubled / 2,
                    "step {}",
                    ev.index
                );
            }
        }
    }

    #[test]
    fn swallowed_originals_are_unique_and_never_reappear() {
        let mut engine = WalkEngine::new(PolicyId::Percolation, derive_stream(23, 9));
        let mut ledger = BoundaryLedger::new();
        let mut last_right = 0i64;
        let mut last_left = 0i64;
        for _ in 0..20_000 {
            let ev = engine.step();
            let report = ledger.apply(ev.form, ev.center_left_choice).unwrap();
            // Each side consumes strictly outward, so indices never repeat.
            for &j in &report.right {
                assert!(j > last_right);
                last_right = j;
            }
            for &j in &report.left {
                assert!(j < last_left);
                last_left = j;
            }
            // Beyond the first step the window is entirely fresh edges, so
            // no swallowed Original can linger anywhere in it.
            if ev.index > 0 {
                assert!(ledger.window().all(|l| matches!(l, Label::Fresh(_))));
            }
        }
    }
}
