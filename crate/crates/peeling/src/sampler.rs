//! Fast exact sampler for the one-step peeling law.
//!
//! Layout per draw: one `u64` decides Center vs side jump (threshold
//! ⌊(2/3)·2⁶⁴⌋) and, in the jump branch, the low bit of the remainder picks
//! the side — both sub-ranges are even, so the spare low bits are exactly
//! fair and the Center branch hands one to the caller as a free coin. Jump
//! sizes come from a Walker alias table over k = 1..65535 plus a composite
//! tail outcome for k ≥ 65536, which is resolved by inversion of the
//! dominating power law with a rejection correction (acceptance ≈ 1 − 10⁻⁴).
//!
//! Total-variation distance to the exact law is bounded by the bit budget
//! (≤ 2⁻³²), far below anything resolvable in ≤ 10¹²-draw experiments.

use rand_core::RngCore;

use peelab_numerics::rng::open01;
use peelab_numerics::special::ln_gamma;

use crate::form::Form;

/// ⌊(2/3)·2⁶⁴⌋, an even number, so the Center branch's low bit is fair.
const CENTER_THRESHOLD: u64 = 12_297_829_382_473_034_410;

/// First jump size handled by the analytic tail instead of the table.
pub const TABLE_CUTOFF: u64 = 1 << 16;

/// Number of alias slots: jump sizes 1..65535 plus one tail outcome.
const SLOTS: usize = 1 << 16;

/// One draw from the peeling law plus a spare fair coin.
///
/// The coin is meaningful on every branch but consumed only by policies
/// that need site colors on `Center` steps.
#[derive(Clone, Copy, Debug)]
pub struct FormDraw {
    pub form: Form,
    pub coin: bool,
}

/// Precomputed sampler; build once, share read-only across threads.
pub struct FormSampler {
    /// Per-slot acceptance threshold, scaled to 2³².
    thresh: Vec<u32>,
    /// Alias outcome per slot.
    alias: Vec<u32>,
    /// ln of the rejection constant for the tail sampler.
    ln_tail_accept: f64,
}

impl FormSampler {
    pub fn new() -> Self {
        // Jump-size distribution conditioned on a side jump: P(k) = 6·q(k).
        // Ratio recursion keeps relative error at the 1e-11 level; the tail
        // outcome takes exactly the complement so the table sums to 1.
        let mut probs = vec![0.0f64; SLOTS];
        let mut q = 0.125;
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for k in 1..TABLE_CUTOFF {
            probs[(k - 1) as usize] = 6.0 * q;
            let y = 6.0 * q - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            let kf = k as f64;
            q *= (2.0 * kf - 1.0) / (2.0 * kf + 4.0);
        }
        probs[SLOTS - 1] = (1.0 - acc).max(0.0);

        let (thresh, alias) = build_alias(&probs);

        // Tail proposal: M = ⌊A·u^{-2/3}⌋ with A = TABLE_CUTOFF, so
        // P(M = m) = A^{3/2}(m^{-3/2} − (m+1)^{-3/2}) for m ≥ A. The
        // acceptance ratio q(m)/P(M=m) decreases in m, so its supremum is at
        // m = A; a hair of slack absorbs rounding.
        let ln_ratio_at_cutoff = ln_q(TABLE_CUTOFF) - ln_proposal(TABLE_CUTOFF);
        let ln_tail_accept = ln_ratio_at_cutoff + 1e-9;

        FormSampler {
            thresh,
            alias,
            ln_tail_accept,
        }
    }

    /// Draws one form together with a spare fair coin.
    pub fn sample(&self, rng: &mut impl RngCore) -> FormDraw {
        let u = rng.next_u64();
        if u < CENTER_THRESHOLD {
            return FormDraw {
                form: Form::Center,
                coin: u & 1 == 1,
            };
        }
        let r = u - CENTER_THRESHOLD;
        let k = self.sample_jump(rng);
        let form = if r & 1 == 1 {
            Form::Right(k)
        } else {
            Form::Left(k)
        };
        FormDraw {
            form,
            coin: (r >> 1) & 1 == 1,
        }
    }

    /// Draws a jump size k ≥ 1 from the normalized law 6·q(k).
    fn sample_jump(&self, rng: &mut impl RngCore) -> u64 {
        let u = rng.next_u64();
        let slot = (u & 0xFFFF) as usize;
        let frac = (u >> 32) as u32;
        let outcome = if frac < self.thresh[slot] {
            slot as u64
        } else {
            self.alias[slot] as u64
        };
        if outcome < (SLOTS - 1) as u64 {
            outcome + 1
        } else {
            self.sample_tail(rng)
        }
    }

    /// Draws k ≥ TABLE_CUTOFF by power-law inversion plus rejection.
    fn sample_tail(&self, rng: &mut impl RngCore) -> u64 {
        let a = TABLE_CUTOFF as f64;
        loop {
            let u = open01(rng);
            // u ≥ 2^-54 keeps A·u^{-2/3} ≤ 2^52, exactly representable.
            let m = (a * u.powf(-2.0 / 3.0)).floor();
            let m_int = m as u64;
            let ln_accept = ln_q(m_int) - ln_proposal(m_int) - self.ln_tail_accept;
            if open01(rng).ln() < ln_accept {
                return m_int;
            }
        }
    }
}

impl Default for FormSampler {
    fn default() -> Self {
        Self::new()
    }
}

/// A form draw through a process-wide shared table.
pub fn sample_form(rng: &mut impl RngCore) -> Form {
    shared_sampler().sample(rng).form
}

/// Lazily built process-wide sampler table.
pub fn shared_sampler() -> &'static FormSampler {
    use std::sync::OnceLock;
    static SHARED: OnceLock<FormSampler> = OnceLock::new();
    SHARED.get_or_init(FormSampler::new)
}

/// ln q(k), the log of the jump probability.
fn ln_q(k: u64) -> f64 {
    let kf = k as f64;
    ln_gamma(2.0 * kf - 1.0) - kf * 4.0f64.ln() - ln_gamma(kf) - ln_gamma(kf + 2.0)
}

/// ln P(M = m) of the tail proposal, in a form stable for huge m:
/// A^{3/2}·m^{-3/2}·(1 − (1 + 1/m)^{-3/2}).
fn ln_proposal(m: u64) -> f64 {
    let a = TABLE_CUTOFF as f64;
    let mf = m as f64;
    1.5 * a.ln() - 1.5 * mf.ln() + (-(-1.5 * (1.0 / mf).ln_1p()).exp_m1()).ln()
}

/// Walker–Vose alias construction over probabilities summing to ~1.
fn build_alias(probs: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let n = probs.len();
    let total: f64 = probs.iter().sum();
    let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64 / total).collect();
    let mut thresh = vec![0u32; n];
    let mut alias = vec![0u32; n];
    let mut small: Vec<usize> = Vec::with_capacity(n);
    let mut large: Vec<usize> = Vec::with_capacity(n);
    for (i, &s) in scaled.iter().enumerate() {
        if s < 1.0 {
            small.push(i);
        } else {
            large.push(i);
        }
    }
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        thresh[s] = to_u32_fraction(scaled[s]);
        alias[s] = l as u32;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    // Leftovers are numerically 1.0: they always accept themselves.
    for &i in small.iter().chain(large.iter()) {
        thresh[i] = u32::MAX;
        alias[i] = i as u32;
    }
    (thresh, alias)
}

fn to_u32_fraction(p: f64) -> u32 {
    let scaled = (p * 4_294_967_296.0).round();
    if scaled >= 4_294_967_295.0 {
        u32::MAX
    } else if scaled <= 0.0 {
        0
    } else {
        scaled as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{delta_plus, q_left, Q_CENTER};
    use peelab_numerics::rng::derive_stream;

    #[test]
    fn center_threshold_constant() {
        // ⌊(2/3)·2⁶⁴⌋ recomputed from integer arithmetic: 2⁶⁵ = 3·T + 2
        // exactly; both T and 2⁶⁴ − T must be even for the fair spare bits.
        let t = CENTER_THRESHOLD;
        assert_eq!(t % 2, 0);
        assert_eq!((u64::MAX - t + 1) % 2, 0);
        assert_eq!(3u128 * t as u128 + 2, 1u128 << 65);
    }

    #[test]
    fn empirical_frequencies_match_law() {
        let sampler = FormSampler::new();
        let mut rng = derive_stream(21, 0);
        let n = 10_000_000u64;
        let mut centers = 0u64;
        let mut left1 = 0u64;
        let mut right2 = 0u64;
        for _ in 0..n {
            match sampler.sample(&mut rng).form {
                Form::Center => centers += 1,
                Form::Left(1) => left1 += 1,
                Form::Right(2) => right2 += 1,
                _ => {}
            }
        }
        let nf = n as f64;
        let se = |p: f64| (p * (1.0 - p) / nf).sqrt();
        let p_center = centers as f64 / nf;
        assert!(
            (p_center - Q_CENTER).abs() < 3.0 * se(Q_CENTER),
            "P(Center) = {p_center}"
        );
        let p_l1 = left1 as f64 / nf;
        let q1 = q_left(1).unwrap();
        assert!((p_l1 - q1).abs() < 3.0 * se(q1), "P(Left(1)) = {p_l1}");
        let p_r2 = right2 as f64 / nf;
        let q2 = q_left(2).unwrap();
        assert!((p_r2 - q2).abs() < 3.0 * se(q2), "P(Right(2)) = {p_r2}");
    }

    #[test]
    fn spare_coin_is_fair_and_independent() {
        let sampler = FormSampler::new();
        let mut rng = derive_stream(21, 1);
        let n = 4_000_000u64;
        let mut heads_center = 0u64;
        let mut centers = 0u64;
        let mut heads_jump = 0u64;
        let mut jumps = 0u64;
        for _ in 0..n {
            let draw = sampler.sample(&mut rng);
            match draw.form {
                Form::Center => {
                    centers += 1;
                    heads_center += draw.coin as u64;
                }
                _ => {
                    jumps += 1;
                    heads_jump += draw.coin as u64;
                }
            }
        }
        let p_c = heads_center as f64 / centers as f64;
        let p_j = heads_jump as f64 / jumps as f64;
        assert!((p_c - 0.5).abs() < 4.0 * (0.25 / centers as f64).sqrt());
        assert!((p_j - 0.5).abs() < 4.0 * (0.25 / jumps as f64).sqrt());
    }

    #[test]
    fn truncated_mean_increment_matches_partial_sums() {
        // E[Δ⁺·1{|Δ⁺| ≤ K}] has the closed partial form
        // ½·(2/3) − Σ_{k≤K} k·q(k); comparing against the truncated
        // empirical mean sidesteps the infinite-variance estimator.
        let k_cap = 1_000u64;
        let (_, moment) = crate::form::q_partial_sums(k_cap);
        let expected = 0.5 * Q_CENTER - moment;
        let sampler = FormSampler::new();
        let mut rng = derive_stream(21, 2);
        let n = 10_000_000u64;
        let mut sum = 0.0f64;
        let mut kept = 0u64;
        for _ in 0..n {
            let d = delta_plus(sampler.sample(&mut rng).form);
            if d.doubled().unsigned_abs() <= 2 * k_cap {
                sum += d.as_f64();
                kept += 1;
            }
        }
        // Var[Δ⁺·1{|Δ⁺| ≤ K}] = ¼·(2/3) + Σ_{k≤K} k²q(k) ≈ 1/6 + 0.282·√K
        // from the k^{-5/2} decay, so the estimator error is fully sized.
        let mean = sum / kept as f64;
        let var = 1.0 / 6.0 + 0.282 * (k_cap as f64).sqrt();
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - expected).abs() < 4.0 * se,
            "truncated mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn tail_sampler_starts_at_cutoff_with_right_rate() {
        let sampler = FormSampler::new();
        let mut rng = derive_stream(21, 3);
        // Call the tail directly: every outcome ≥ cutoff, and the
        // frequency of {k ≥ 2·cutoff | k ≥ cutoff} matches the power law:
        // tails ~ k^{-3/2} give 2^{-3/2} ≈ 0.3536.
        let n = 200_000;
        let mut beyond_double = 0u64;
        for _ in 0..n {
            let k = sampler.sample_tail(&mut rng);
            assert!(k >= TABLE_CUTOFF);
            if k >= 2 * TABLE_CUTOFF {
                beyond_double += 1;
            }
        }
        let p = beyond_double as f64 / n as f64;
        let target = 0.5f64.powf(1.5);
        let se = (target * (1.0 - target) / n as f64).sqrt();
        assert!((p - target).abs() < 4.0 * se, "p {p} vs {target}");
    }

    #[test]
    fn jump_table_matches_exact_law_in_detail() {
        // Chi-square-style check over the first 40 jump sizes.
        let sampler = FormSampler::new();
        let mut rng = derive_stream(21, 4);
        let n = 4_000_000u64;
        let mut counts = [0u64; 41];
        let mut total = 0u64;
        for _ in 0..n {
            if let Some(k) = sampler.sample(&mut rng).form.jump() {
                total += 1;
                if k <= 40 {
                    counts[k as usize] += 1;
                }
            }
        }
        for k in 1..=40u64 {
            let p = 6.0 * q_left(k).unwrap();
            let freq = counts[k as usize] as f64 / total as f64;
            let se = (p * (1.0 - p) / total as f64).sqrt();
            assert!(
                (freq - p).abs() < 4.5 * se,
                "k={k}: freq {freq} vs {p} (se {se})"
            );
        }
    }
}
