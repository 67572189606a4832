//! Record times of the two horodistance coordinates and the statistics
//! built from them.
//!
//! A step i sets a record for a coordinate when its half-step value is ≤
//! the running minimum (ties included). The alternating chain visits a
//! plus record, then a minus record at or after it, then a plus record
//! again, and so on. Ties make it possible for one index to serve both
//! signs; to keep the chain from stalling there, an index may be consumed
//! at most once per sign, and the search for a sign resumes strictly after
//! an index it already consumed for that sign.

use rand_core::RngCore;

use crate::walk::{HorodistanceWalk, StepEvent, WalkEngine};

/// Alternating-record consumer: feed per-step record flags in index order,
/// get back the chain points τ⁽¹⁾ ≤ τ⁽²⁾ ≤ … as they are found.
pub struct RecordChainScanner {
    awaiting_plus: bool,
    last_plus: Option<u64>,
    last_minus: Option<u64>,
    consumed: u64,
}

impl Default for RecordChainScanner {
    fn default() -> Self {
        Self::new()
    }
}

impl RecordChainScanner {
    pub fn new() -> Self {
        RecordChainScanner {
            awaiting_plus: true,
            last_plus: None,
            last_minus: None,
            consumed: 0,
        }
    }

    /// Chain points consumed so far.
    pub fn chain_len(&self) -> u64 {
        self.consumed
    }

    /// Offers the record flags of step `index`; `sink(k, index)` fires for
    /// each chain point consumed here, with k the 1-based chain position.
    /// At most two points (one per sign) can land on one index.
    pub fn offer(
        &mut self,
        index: u64,
        plus_record: bool,
        minus_record: bool,
        mut sink: impl FnMut(u64, u64),
    ) {
        loop {
            let (fires, last) = if self.awaiting_plus {
                (plus_record, &mut self.last_plus)
            } else {
                (minus_record, &mut self.last_minus)
            };
            if !fires || *last == Some(index) {
                return;
            }
            *last = Some(index);
            self.consumed += 1;
            sink(self.consumed, index);
            self.awaiting_plus = !self.awaiting_plus;
        }
    }
}

/// Result of scanning a finite walk for the alternating chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauChain {
    /// τ⁽¹⁾(start), τ⁽²⁾(start), …, at most the requested number.
    pub indices: Vec<u64>,
    /// The walk ended before all requested records were found.
    pub truncated: bool,
}

/// Scans a materialized walk for the first `max_records` alternating
/// record times at or after `start`. Minima accumulate from step 0, so
/// records reflect the full history even when `start > 0`.
pub fn tau_chain(walk: &HorodistanceWalk, start: usize, max_records: usize) -> TauChain {
    let mut scanner = RecordChainScanner::new();
    let mut indices = Vec::new();
    let mut min_plus = 0i64;
    let mut min_minus = 0i64;
    for i in 0..walk.len() {
        let half_plus = walk.h_plus_half_doubled(i);
        let half_minus = walk.h_minus_half_doubled(i);
        let plus_record = half_plus <= min_plus;
        let minus_record = half_minus <= min_minus;
        min_plus = min_plus.min(half_plus);
        min_minus = min_minus.min(half_minus);
        if i >= start {
            scanner.offer(i as u64, plus_record, minus_record, |_, idx| {
                if indices.len() < max_records {
                    indices.push(idx);
                }
            });
            if indices.len() >= max_records {
                break;
            }
        }
    }
    let truncated = indices.len() < max_records;
    TauChain { indices, truncated }
}

/// First plus-record time at or after `start` — the head of the chain.
/// `None` if the walk ends first.
pub fn tau_plus(walk: &HorodistanceWalk, start: usize) -> Option<u64> {
    let chain = tau_chain(walk, start, 1);
    chain.indices.first().copied()
}

#[derive(Clone, Copy, Debug)]
pub struct CommutingCount {
    /// The count itself: the first odd chain position whose record time has
    /// pushed the plus minimum to −n or deeper.
    pub commutings: u64,
    /// First step at which the plus minimum reached the ε-threshold.
    pub threshold_index: u64,
    /// Record time that closed the count.
    pub final_index: u64,
    /// Steps consumed from the supplied event stream.
    pub steps: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CommutingError {
    #[error("threshold ⌊ε·n⌋ = {target} must be ≥ 1 (ε = {eps}, n = {n})")]
    BadThreshold { eps: f64, n: u64, target: i64 },
    #[error(
        "budget of {steps} steps exhausted: {chain_len} record(s) in the chain, \
         plus minimum at depth {min_plus_reached}, threshold reached: {reached_threshold}"
    )]
    Overrun {
        steps: u64,
        chain_len: u64,
        /// −ℋ̲⁺ in edges when the budget ran out.
        min_plus_reached: i64,
        reached_threshold: bool,
    },
}

/// Commuting count with the threshold given directly in edges.
///
/// Waits for the plus minimum to reach −`target_edges` (step t), then walks
/// the alternating record chain from t and returns the first odd position
/// whose record time has the plus minimum at −n or deeper. The event stream
/// is consumed lazily; `budget` caps the total steps taken.
pub fn commuting_count_at_level(
    events: impl IntoIterator<Item = StepEvent>,
    target_edges: u64,
    n: u64,
    budget: u64,
) -> Result<CommutingCount, CommutingError> {
    let trigger_doubled = -2 * (target_edges as i64);
    let stop_doubled = -2 * (n as i64);
    let mut events = events.into_iter();
    let mut steps = 0u64;
    let mut scanner = RecordChainScanner::new();
    let mut threshold_index = None;
    let mut found: Option<(u64, u64)> = None;
    let mut min_plus_doubled = 0i64;

    while found.is_none() && steps < budget {
        let Some(ev) = events.next() else { break };
        steps += 1;
        min_plus_doubled = ev.min_plus_doubled;
        if threshold_index.is_none() {
            if ev.min_plus_doubled > trigger_doubled {
                continue;
            }
            threshold_index = Some(ev.index);
        }
        scanner.offer(ev.index, ev.new_plus_record, ev.new_minus_record, |k, idx| {
            if found.is_none() && k % 2 == 1 && ev.min_plus_doubled <= stop_doubled {
                found = Some((k, idx));
            }
        });
    }

    match (found, threshold_index) {
        (Some((commutings, final_index)), Some(threshold_index)) => Ok(CommutingCount {
            commutings,
            threshold_index,
            final_index,
            steps,
        }),
        _ => Err(CommutingError::Overrun {
            steps,
            chain_len: scanner.chain_len(),
            min_plus_reached: -min_plus_doubled / 2,
            reached_threshold: threshold_index.is_some(),
        }),
    }
}

/// Commuting count of a live walk: threshold ⌊ε·n⌋ edges, target level −n.
/// The walk extends itself (policy-consistently) until the count closes or
/// the step budget runs out.
pub fn c_dis<R: RngCore>(
    engine: &mut WalkEngine<R>,
    eps: f64,
    n: u64,
    budget: u64,
) -> Result<CommutingCount, CommutingError> {
    let target = (eps * n as f64).floor() as i64;
    if !(eps > 0.0 && eps < 1.0 && target >= 1) {
        return Err(CommutingError::BadThreshold { eps, n, target });
    }
    commuting_count_at_level(
        std::iter::from_fn(|| Some(engine.step())),
        target as u64,
        n,
        budget,
    )
}

/// Interlaced record values of two independent walks: the first record
/// depth of the first walk, then alternately the smallest record depth of
/// the other walk strictly exceeding the last one. Returns the log-gaps
/// between consecutive depths, or `None` if either walk's step budget runs
/// out first (a censored replica).
pub fn interlaced_record_gaps<R: RngCore>(
    first: &mut WalkEngine<R>,
    second: &mut WalkEngine<R>,
    n_gaps: usize,
    budget_per_walk: u64,
) -> Option<Vec<f64>> {
    fn next_depth_above<R: RngCore>(
        engine: &mut WalkEngine<R>,
        used: &mut u64,
        budget: u64,
        floor_doubled: i64,
    ) -> Option<i64> {
        loop {
            let depth = -engine.min_plus_doubled();
            if depth > floor_doubled {
                return Some(depth);
            }
            if *used >= budget {
                return None;
            }
            engine.step();
            *used += 1;
        }
    }

    let mut used_first = 0u64;
    let mut used_second = 0u64;
    let mut depths = Vec::with_capacity(n_gaps + 1);
    let mut depth = next_depth_above(first, &mut used_first, budget_per_walk, 0)?;
    depths.push(depth);
    let mut from_second = true;
    while depths.len() < n_gaps + 1 {
        depth = if from_second {
            next_depth_above(second, &mut used_second, budget_per_walk, depth)?
        } else {
            next_depth_above(first, &mut used_first, budget_per_walk, depth)?
        };
        depths.push(depth);
        from_second = !from_second;
    }
    Some(
        depths
            .windows(2)
            .map(|w| (w[1] as f64).ln() - (w[0] as f64).ln())
            .collect(),
    )
}
