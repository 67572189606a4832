//! One runner per experiment: each resolves its tunables from the merged
//! configuration, fans the replicas out over a thread pool with one derived
//! random stream per replica, aggregates in replica order, and returns
//! report rows whose targets carry their closed forms.
//!
//! Reproducibility contract: replica `i` of experiment code `e` always
//! draws from `derive_stream(seed, stream_id(e, i, substream))`, and all
//! reductions run serially over the replica-ordered results, so the report
//! is a function of the configuration alone — never of the thread count.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use rayon::prelude::*;

use peelab_numerics::rng::{derive_stream, stream_id};
use peelab_numerics::{
    ks_distance_density, ks_distance_two_sample, sample_stable32, MeanStderr,
};
use peelab_peeling::{
    c_dis, delta_minus, delta_plus, form::q_tail_mass_bound, q_partial_sums, run_walk,
    BoundaryLedger, CommutingError, Form, PolicyId, WalkEngine,
};
use peelab_sle::{
    boundary_crossing_time, comsle_direct, ergodic_inverse_gap_average, f_ode_oracle,
    first_hit_of_one_from, rho_checks, run_triple_to, sample_rho, scale_span, step_triple,
    step_z_with, t1_constant, theta_rate, LogTimeState, StepControl, ThetaRateSample, TripleState,
};
use peelab_stable::{
    comstable_rate_constant, comstable_replica, kernel_density, kernel_mass_defect,
    reversibility_residual, sample_record_gap, sample_varpi, xi_rate_replica, RecordChain,
};

use crate::config::{Cli, Command, ConfigError, FileConfig, Format, Merge, Profile};
use crate::report::{checked, info, window_excess, Estimate, Report, Target, REPORT_VERSION};

/// Experiment stream codes. Each subcommand owns a 16-bit code so replica
/// streams never alias across experiments; the `dimension` combiner reuses
/// the codes of the two rate experiments it aggregates, which makes its
/// Monte Carlo rates bit-identical to standalone runs at equal settings.
mod exp {
    pub const PEEL_KS: u16 = 2;
    pub const PERCO_KS: u16 = 3;
    pub const LEDGER_FUZZ: u16 = 4;
    pub const CDIS: u16 = 5;
    pub const CHAIN_RATE: u16 = 6;
    pub const CHAIN_CHECKS: u16 = 7;
    pub const COMSTABLE: u16 = 8;
    pub const Z_T1: u16 = 9;
    pub const Z_ERGODIC: u16 = 10;
    pub const THETA_RATE: u16 = 11;
    pub const COMSLE: u16 = 12;
    pub const STABLE_SCALING: u16 = 15;
    pub const TRIPLE_SANITY: u16 = 16;
}

/// Failures after configuration parsing. `Config` maps to exit code 2,
/// `Budget` to exit code 3; estimator check failures are not errors (the
/// report is still emitted and the process exits 1).
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("step budget exhausted: {0}")]
    Budget(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Budget(_) => 3,
        }
    }
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Invalid(msg.into()))
}

fn require(cond: bool, msg: &str) -> Result<(), RunError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg))
    }
}

/// Maps replica indices through `job` on a pool of `threads` workers
/// (0 = one per core) and returns the results in replica order.
fn run_replicas<T: Send>(
    threads: usize,
    replicas: u32,
    job: impl Fn(u32) -> T + Sync,
) -> Result<Vec<T>, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("cannot build the worker pool: {e}")))?;
    Ok(pool.install(|| (0..replicas).into_par_iter().map(&job).collect()))
}

// ---------------------------------------------------------------------------
// Jump-law sums
// ---------------------------------------------------------------------------

/// Partial first moment and tail-corrected total mass of the one-step law.
pub fn peel_moments_rows(k_max: u64) -> Result<Vec<Estimate>, RunError> {
    require(k_max >= 1, "k-max must be at least 1")?;
    let (sum_q, sum_kq) = q_partial_sums(k_max);
    let mass = 2.0 / 3.0 + 2.0 * (sum_q + q_tail_mass_bound(k_max));
    Ok(vec![
        checked(
            "jump_first_moment",
            sum_kq,
            None,
            Target::new("1/3", 1.0 / 3.0),
            5e-4,
        ),
        checked(
            "total_mass_tail_corrected",
            mass,
            None,
            Target::new("1", 1.0),
            6e-4,
        ),
    ])
}

// ---------------------------------------------------------------------------
// Rescaled walk endpoints vs the stable marginal
// ---------------------------------------------------------------------------

/// Distribution check of the rescaled boundary-variation endpoints against
/// the unit-time stable marginal. Under the predicted-edge policy the pure
/// half-step sums are compared (the policy offsets vanish in the limit and
/// the sums isolate the i.i.d. contribution); under the other policies the
/// full walk coordinates are used.
pub fn walk_ks_rows(
    seed: u64,
    code: u16,
    policy: PolicyId,
    n: usize,
    replicas: u32,
    reference: usize,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(n >= 1, "n must be at least 1")?;
    require(replicas >= 1, "replicas must be at least 1")?;
    require(reference >= 1, "reference must be at least 1")?;
    let scale = 3f64.powf(2.0 / 3.0) * (n as f64).powf(-2.0 / 3.0);
    let endpoints: Vec<(f64, f64)> = run_replicas(threads, replicas, |i| {
        let rng = derive_stream(seed, stream_id(code, i, 0));
        let mut engine = WalkEngine::new(policy, rng);
        if matches!(policy, PolicyId::PredictedEdge) {
            let mut dp = 0i64;
            let mut dm = 0i64;
            for _ in 0..n {
                let ev = engine.step();
                dp += delta_plus(ev.form).doubled();
                dm += delta_minus(ev.form).doubled();
            }
            (scale * dp as f64 / 2.0, scale * dm as f64 / 2.0)
        } else {
            let mut last = (0i64, 0i64);
            for _ in 0..n {
                let ev = engine.step();
                last = (ev.h_plus_doubled, ev.h_minus_doubled);
            }
            (scale * last.0 as f64 / 2.0, scale * last.1 as f64 / 2.0)
        }
    })?;
    let mut ref_rng = derive_stream(seed, stream_id(code, 0, 1));
    let reference: Vec<f64> = (0..reference).map(|_| sample_stable32(&mut ref_rng)).collect();
    let plus: Vec<f64> = endpoints.iter().map(|e| e.0).collect();
    let minus: Vec<f64> = endpoints.iter().map(|e| e.1).collect();
    let ks_plus = ks_distance_two_sample(&plus, &reference)
        .map_err(|e| invalid(format!("distance computation failed: {e}")))?;
    let ks_minus = ks_distance_two_sample(&minus, &reference)
        .map_err(|e| invalid(format!("distance computation failed: {e}")))?;
    let target = || Target::new("0 (same law)", 0.0);
    Ok(vec![
        checked("ks_variation_plus", ks_plus, None, target(), 0.03),
        checked("ks_variation_minus", ks_minus, None, target(), 0.03),
    ])
}

// ---------------------------------------------------------------------------
// Boundary-ledger invariants
// ---------------------------------------------------------------------------

/// Replays randomized walks of every policy into the independent boundary
/// ledger and counts violations of the exact invariants: offsets cancel
/// (η⁺ + η⁻ = 0), offsets are ±½ exactly on vertex steps and 0 on jumps,
/// half-step increments equal the form's displacement pair, the negated
/// running minima equal the swallowed-edge counts, and the ledger's
/// horodistance equals the walk's incremental value.
pub fn ledger_fuzz_rows(
    seed: u64,
    seeds: u32,
    steps_per_seed: u64,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(seeds >= 1, "seeds must be at least 1")?;
    require(steps_per_seed >= 1, "steps-per-seed must be at least 1")?;
    let per_seed: Vec<(u64, u64)> = run_replicas(threads, seeds, |i| {
        let mut steps = 0u64;
        let mut violations = 0u64;
        for policy in PolicyId::ALL {
            let rng = derive_stream(seed, stream_id(exp::LEDGER_FUZZ, i, policy as u8));
            let mut engine = WalkEngine::new(policy, rng);
            let mut ledger = BoundaryLedger::new();
            let mut prev_p = 0i64;
            let mut prev_m = 0i64;
            for _ in 0..steps_per_seed {
                let ev = engine.step();
                steps += 1;
                let eta = ev.eta_plus_doubled as i64;
                let ok_offsets = ev.h_plus_doubled - ev.h_plus_half_doubled == eta
                    && ev.h_minus_doubled - ev.h_minus_half_doubled == -eta;
                let ok_support = match ev.form {
                    Form::Center => eta.abs() == 1,
                    _ => eta == 0,
                };
                let ok_increments = ev.h_plus_half_doubled - prev_p
                    == delta_plus(ev.form).doubled()
                    && ev.h_minus_half_doubled - prev_m == delta_minus(ev.form).doubled();
                let ok_ledger = match ledger.apply(ev.form, ev.center_left_choice) {
                    Err(_) => false,
                    Ok(_) => {
                        let (hp, hm) = ledger.horodistance_oracle();
                        hp.doubled() == ev.h_plus_doubled
                            && hm.doubled() == ev.h_minus_doubled
                            && ledger.swallowed_right() as i64 == -ev.min_plus_doubled / 2
                            && ledger.swallowed_left() as i64 == -ev.min_minus_doubled / 2
                    }
                };
                if !(ok_offsets && ok_support && ok_increments && ok_ledger) {
                    violations += 1;
                }
                prev_p = ev.h_plus_doubled;
                prev_m = ev.h_minus_doubled;
            }
        }
        (steps, violations)
    })?;
    let steps: u64 = per_seed.iter().map(|r| r.0).sum();
    let violations: u64 = per_seed.iter().map(|r| r.1).sum();
    Ok(vec![
        info("steps_checked", steps as f64, None, None),
        checked(
            "invariant_violations",
            violations as f64,
            None,
            Target::new("0", 0.0),
            0.0,
        ),
    ])
}

// ---------------------------------------------------------------------------
// Discrete commuting count
// ---------------------------------------------------------------------------

/// Mean discrete commuting count at depth `n` with threshold fraction
/// `eps`. Replicas that exhaust the per-replica step budget are censored
/// and reported; more than 25% censoring aborts the run (exit code 3),
/// since the surviving mean would no longer be interpretable.
pub fn cdis_rows(
    seed: u64,
    n: u64,
    eps: f64,
    replicas: u32,
    budget: u64,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(replicas >= 1, "replicas must be at least 1")?;
    require(
        eps > 0.0 && eps < 1.0 && (eps * n as f64).floor() >= 1.0,
        "the threshold floor(eps*n) must be at least 1",
    )?;
    let outcomes: Vec<Option<u64>> = run_replicas(threads, replicas, |i| {
        let rng = derive_stream(seed, stream_id(exp::CDIS, i, 0));
        let mut engine = WalkEngine::new(PolicyId::PredictedEdge, rng);
        match c_dis(&mut engine, eps, n, budget) {
            Ok(count) => Some(count.commutings),
            Err(CommutingError::Overrun { .. }) => None,
            Err(CommutingError::BadThreshold { .. }) => {
                unreachable!("threshold validated before the replicas start")
            }
        }
    })?;
    let censored = outcomes.iter().filter(|o| o.is_none()).count();
    let frac = censored as f64 / replicas as f64;
    if frac > 0.25 {
        return Err(RunError::Budget(format!(
            "{censored} of {replicas} replicas exhausted the {budget}-step budget (> 25%)"
        )));
    }
    let counts: Vec<f64> = outcomes.iter().flatten().map(|&c| c as f64).collect();
    let s = MeanStderr::from_samples(&counts);
    let target = comstable_rate_constant() * (-eps.ln());
    Ok(vec![
        checked(
            "mean_count",
            s.mean,
            Some(s.stderr),
            Target::new("3*sqrt(3)/(2*pi) * |log(eps)|", target),
            0.25 * target,
        ),
        info("censored_fraction", frac, None, None),
    ])
}

// ---------------------------------------------------------------------------
// Record-gap chain
// ---------------------------------------------------------------------------

/// Monte Carlo growth rate of the record cascade's log-depth: the mean gap
/// along equilibrated chains, `k` gaps per replica.
pub fn xi_rate_estimate(
    seed: u64,
    k: u64,
    replicas: u32,
    threads: usize,
) -> Result<MeanStderr, RunError> {
    require(k >= 1, "k must be at least 1")?;
    require(replicas >= 1, "replicas must be at least 1")?;
    let samples = run_replicas(threads, replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::CHAIN_RATE, i, 0));
        xi_rate_replica(&mut rng, k)
    })?;
    Ok(MeanStderr::from_samples(&samples))
}

pub fn chain_rate_rows_from(est: &MeanStderr) -> Vec<Estimate> {
    vec![checked(
        "log_depth_rate",
        est.mean,
        Some(est.stderr),
        Target::new("pi/sqrt(3)", PI / 3f64.sqrt()),
        0.02,
    )]
}

/// Closed-form self-checks of the gap chain: kernel normalization by
/// quadrature, the detailed-balance identity at random pairs, and the gap
/// sampler against its own density.
pub fn chain_checks_rows(
    seed: u64,
    pairs: u32,
    ks_draws: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(pairs >= 1, "pairs must be at least 1")?;
    require(ks_draws >= 10, "ks-draws must be at least 10")?;
    const ABSCISSAS: [f64; 3] = [0.1, 1.0, 5.0];
    let mut rows = Vec::new();
    for &x in &ABSCISSAS {
        let defect = kernel_mass_defect(x)
            .map_err(|e| invalid(format!("quadrature failed: {e}")))?;
        rows.push(checked(
            format!("kernel_mass_defect_x{x}"),
            defect,
            None,
            Target::new("0", 0.0),
            1e-6,
        ));
    }
    let mut rng = derive_stream(seed, stream_id(exp::CHAIN_CHECKS, 0, 0));
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x = sample_varpi(&mut rng);
        let y = sample_varpi(&mut rng);
        worst = worst.max(reversibility_residual(x, y).abs());
    }
    rows.push(checked(
        "reversibility_max_residual",
        worst,
        None,
        Target::new("0", 0.0),
        1e-10,
    ));
    for (j, &x) in ABSCISSAS.iter().enumerate() {
        let mut rng = derive_stream(seed, stream_id(exp::CHAIN_CHECKS, j as u32, 1));
        let sample: Vec<f64> = (0..ks_draws).map(|_| sample_record_gap(&mut rng, x)).collect();
        let d = ks_distance_density(&sample, |y| kernel_density(x, y), 0.0, 2_000)
            .map_err(|e| invalid(format!("distance computation failed: {e}")))?;
        rows.push(checked(
            format!("gap_sampler_ks_x{x}"),
            d,
            None,
            Target::new("0 (same law)", 0.0),
            0.005,
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Cascade commuting count
// ---------------------------------------------------------------------------

/// Mean cascade commuting count at log-depth `log_x`, and the count per
/// unit log-depth against its limiting rate constant.
pub fn comstable_rows(
    seed: u64,
    log_x: f64,
    replicas: u32,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(replicas >= 1, "replicas must be at least 1")?;
    require(log_x > 0.0 && log_x.is_finite(), "log-x must be positive and finite")?;
    let counts = run_replicas(threads, replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::COMSTABLE, i, 0));
        comstable_replica(&mut rng, log_x) as f64
    })?;
    let s = MeanStderr::from_samples(&counts);
    Ok(vec![
        info("mean_count", s.mean, Some(s.stderr), None),
        checked(
            "count_per_log_depth",
            s.mean / log_x,
            Some(s.stderr / log_x),
            Target::new("3*sqrt(3)/(2*pi)", comstable_rate_constant()),
            0.05,
        ),
    ])
}

// ---------------------------------------------------------------------------
// Interface-position diffusion
// ---------------------------------------------------------------------------

/// Mean first crossing time of the interface position from 0 to 1, plus
/// the boundary-value solve of the same constant as a non-stochastic check.
pub fn z_t1_rows(seed: u64, replicas: u32, threads: usize) -> Result<Vec<Estimate>, RunError> {
    require(replicas >= 1, "replicas must be at least 1")?;
    let samples = run_replicas(threads, replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::Z_T1, i, 0));
        boundary_crossing_time(&mut rng, &StepControl::default(), false)
    })?;
    let s = MeanStderr::from_samples(&samples);
    let sol = f_ode_oracle().map_err(|e| invalid(format!("quadrature failed: {e}")))?;
    Ok(vec![
        checked(
            "crossing_time_mean",
            s.mean,
            Some(s.stderr),
            Target::new("pi/(7*sqrt(3))", t1_constant()),
            0.005,
        ),
        checked(
            "ode_travel_time_at_one",
            sol.f_one,
            None,
            Target::new("pi/(7*sqrt(3))", t1_constant()),
            1e-6,
        ),
    ])
}

/// Long-run time average of the inverse gap functional 1/(Z(1−Z)).
pub fn z_ergodic_rows(
    seed: u64,
    replicas: u32,
    r_end: f64,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(replicas >= 1, "replicas must be at least 1")?;
    require(r_end > 0.0 && r_end.is_finite(), "r-end must be positive and finite")?;
    let samples = run_replicas(threads, replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::Z_ERGODIC, i, 0));
        ergodic_inverse_gap_average(&mut rng, &StepControl::default(), r_end)
    })?;
    let s = MeanStderr::from_samples(&samples);
    Ok(vec![checked(
        "inverse_gap_average",
        s.mean,
        Some(s.stderr),
        Target::new("7", 7.0),
        0.1,
    )])
}

/// The three per-hit rate readings after `n_hits` alternated boundary hits:
/// log physical time per hit, diffusion time per hit, and their ratio.
pub fn theta_rate_estimates(
    seed: u64,
    n_hits: u64,
    replicas: u32,
    budget: u64,
    threads: usize,
) -> Result<[MeanStderr; 3], RunError> {
    require(n_hits >= 1, "n-hits must be at least 1")?;
    require(replicas >= 1, "replicas must be at least 1")?;
    let outcomes: Vec<Result<ThetaRateSample, String>> = run_replicas(threads, replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::THETA_RATE, i, 0));
        theta_rate(&mut rng, &StepControl::default(), n_hits, budget).map_err(|e| e.to_string())
    })?;
    let overruns = outcomes.iter().filter(|o| o.is_err()).count();
    if overruns > 0 {
        let first = outcomes.iter().find_map(|o| o.as_ref().err()).expect("counted above");
        return Err(RunError::Budget(format!(
            "{overruns} of {replicas} replicas exceeded {budget} substeps ({first})"
        )));
    }
    let samples: Vec<&ThetaRateSample> = outcomes.iter().map(|o| o.as_ref().expect("no overruns")).collect();
    let log_t: Vec<f64> = samples.iter().map(|s| s.log_t_per_hit()).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.r_per_hit()).collect();
    let ratio: Vec<f64> = samples.iter().map(|s| s.log_t_over_r()).collect();
    Ok([
        MeanStderr::from_samples(&log_t),
        MeanStderr::from_samples(&r),
        MeanStderr::from_samples(&ratio),
    ])
}

pub fn theta_rate_rows_from(est: &[MeanStderr; 3]) -> Vec<Estimate> {
    vec![
        checked(
            "log_time_per_hit",
            est[0].mean,
            Some(est[0].stderr),
            Target::new("4*pi/sqrt(3)", 4.0 * PI / 3f64.sqrt()),
            0.15,
        ),
        checked(
            "diffusion_time_per_hit",
            est[1].mean,
            Some(est[1].stderr),
            Target::new("pi/(7*sqrt(3))", t1_constant()),
            0.01,
        ),
        checked(
            "log_time_per_diffusion_time",
            est[2].mean,
            Some(est[2].stderr),
            Target::new("28", 28.0),
            1.0,
        ),
    ]
}

// ---------------------------------------------------------------------------
// Hull commuting counts (physical backend)
// ---------------------------------------------------------------------------

/// Mean hull commuting counts at the given log-positions, the least-squares
/// slope of count against log-position, and the cross-backend check that
/// the first-touch time laws of the two integrators agree.
#[allow(clippy::too_many_arguments)]
pub fn comsle_rows(
    seed: u64,
    log_targets: &[f64],
    step_scale: f64,
    replicas: u32,
    agreement_replicas: u32,
    budget: u64,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(replicas >= 1, "replicas must be at least 1")?;
    require(agreement_replicas >= 1, "agreement-replicas must be at least 1")?;
    require(!log_targets.is_empty(), "log-targets must not be empty")?;
    require(
        log_targets.iter().all(|&g| (0.0..=6.0).contains(&g)),
        "log-targets must lie in [0, 6]",
    )?;
    require(step_scale > 0.0 && step_scale.is_finite(), "step-scale must be positive")?;
    let targets: Vec<f64> = log_targets.iter().map(|&g| g.exp()).collect();
    let per_replica: Vec<Result<Vec<u32>, String>> = run_replicas(threads, replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::COMSLE, i, 0));
        comsle_direct(&targets, step_scale, budget, &mut rng)
            .map(|v| v.iter().map(|s| s.count).collect())
            .map_err(|e| e.to_string())
    })?;
    let overruns = per_replica.iter().filter(|o| o.is_err()).count();
    if overruns > 0 {
        let first = per_replica.iter().find_map(|o| o.as_ref().err()).expect("counted above");
        return Err(RunError::Budget(format!(
            "{overruns} of {replicas} replicas exceeded {budget} steps ({first})"
        )));
    }
    let mut rows = Vec::new();
    let mut means = Vec::with_capacity(targets.len());
    for (j, &g) in log_targets.iter().enumerate() {
        let counts: Vec<f64> = per_replica
            .iter()
            .map(|o| o.as_ref().expect("no overruns")[j] as f64)
            .collect();
        let s = MeanStderr::from_samples(&counts);
        rows.push(info(format!("mean_count_logx{g}"), s.mean, Some(s.stderr), None));
        means.push(s);
    }
    if log_targets.len() >= 2 {
        let x_mean = log_targets.iter().sum::<f64>() / log_targets.len() as f64;
        let sxx: f64 = log_targets.iter().map(|x| (x - x_mean).powi(2)).sum();
        require(sxx > 0.0, "log-targets must not all be equal")?;
        let y_mean = means.iter().map(|s| s.mean).sum::<f64>() / means.len() as f64;
        let slope = log_targets
            .iter()
            .zip(&means)
            .map(|(x, s)| (x - x_mean) * (s.mean - y_mean))
            .sum::<f64>()
            / sxx;
        let slope_var: f64 = log_targets
            .iter()
            .zip(&means)
            .map(|(x, s)| ((x - x_mean) / sxx * s.stderr).powi(2))
            .sum();
        rows.push(info(
            "count_slope",
            slope,
            Some(slope_var.sqrt()),
            Some(Target::new("sqrt(3)/(2*pi)", 3f64.sqrt() / (2.0 * PI))),
        ));
        rows.push(window_excess("count_slope", slope, 0.15, 0.45));
    }

    // Cross-backend first-touch comparison with a matched start: the hull
    // state at t = 1 that corresponds to position z0 with unit gap, and the
    // diffusion clock r(t) = ∫₁ᵗ Δ⁻² ds accumulated by trapezoid.
    let pairs: Vec<(f64, f64)> = run_replicas(threads, agreement_replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::COMSLE, i, 2));
        let ctl = StepControl::default();
        let z0 = sample_rho(&mut rng);
        let from_logtime = first_hit_of_one_from(&mut rng, &ctl, z0);
        let mut state = TripleState::from_coordinates(1.0, z0 * z0, 0.0, (1.0 - z0) * (1.0 - z0));
        let mut r = 0.0;
        let mut inv_old = state.delta().powi(-2);
        loop {
            let dt = 1e-4 * state.delta().powi(2);
            let report = step_triple(&mut state, dt, &mut rng).expect("positive step");
            let inv_new = state.delta().powi(-2);
            r += 0.5 * dt * (inv_old + inv_new);
            inv_old = inv_new;
            if report.touched_right {
                break;
            }
        }
        (from_logtime, r)
    })?;
    let lt: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tr: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d = ks_distance_two_sample(&lt, &tr)
        .map_err(|e| invalid(format!("distance computation failed: {e}")))?;
    rows.push(checked(
        "backend_agreement_ks",
        d,
        None,
        Target::new("0 (same law)", 0.0),
        0.05,
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Stationary-law quadratures
// ---------------------------------------------------------------------------

/// Recomputes the stationary law's mass, its inverse-gap visit rate, and
/// the scale-function span by quadrature against their closed forms.
pub fn rho_checks_rows() -> Result<Vec<Estimate>, RunError> {
    let checks = rho_checks().map_err(|e| invalid(format!("quadrature failed: {e}")))?;
    Ok(vec![
        checked("stationary_mass", checks.mass, None, Target::new("1", 1.0), 1e-8),
        checked(
            "stationary_visit_rate",
            checks.visit_rate,
            None,
            Target::new("7", 7.0),
            1e-6,
        ),
        checked(
            "scale_span_quadrature",
            checks.scale_span_quadrature,
            None,
            Target::new("B(1/3, 1/3)", scale_span()),
            1e-8,
        ),
    ])
}

// ---------------------------------------------------------------------------
// Dimension combiner
// ---------------------------------------------------------------------------

/// Combines the two logarithmic rates into the boundary exponent and its
/// reciprocal dimension: exponent = ((3/2)/rate_xi) / (2/rate_theta)
/// = 3·rate_theta/(4·rate_xi). Computed so that plugging the exact
/// constants pi/sqrt(3) and 4*pi/sqrt(3) yields exactly (3, 1/3): the rate
/// ratio is an exact 4 in floating point (scaling by a power of two
/// commutes with rounding), and the remaining factors are exact.
pub fn dimension_combine(rate_xi: f64, rate_theta: f64) -> (f64, f64) {
    let exponent = 3.0 * (rate_theta / rate_xi) / 4.0;
    (exponent, 1.0 / exponent)
}

pub fn dimension_rows(
    rate_xi: f64,
    se_xi: Option<f64>,
    rate_theta: f64,
    se_theta: Option<f64>,
) -> Vec<Estimate> {
    let (exponent, dimension) = dimension_combine(rate_xi, rate_theta);
    let rel = match (se_xi, se_theta) {
        (Some(a), Some(b)) => Some(((a / rate_xi).powi(2) + (b / rate_theta).powi(2)).sqrt()),
        _ => None,
    };
    vec![
        info(
            "rate_xi",
            rate_xi,
            se_xi,
            Some(Target::new("pi/sqrt(3)", PI / 3f64.sqrt())),
        ),
        info(
            "rate_theta",
            rate_theta,
            se_theta,
            Some(Target::new("4*pi/sqrt(3)", 4.0 * PI / 3f64.sqrt())),
        ),
        info(
            "boundary_exponent",
            exponent,
            rel.map(|r| exponent.abs() * r),
            Some(Target::new("3", 3.0)),
        ),
        window_excess("boundary_exponent", exponent, 2.7, 3.3),
        info(
            "dimension",
            dimension,
            rel.map(|r| dimension.abs() * r),
            Some(Target::new("1/3", 1.0 / 3.0)),
        ),
        window_excess("dimension", dimension, 0.30, 0.37),
    ]
}

// ---------------------------------------------------------------------------
// Stable-sampler oracles (run inside accept-all)
// ---------------------------------------------------------------------------

/// Laplace-transform and scaling oracles of the stable sampler: the mean of
/// exp(λS) against exp(λ^{3/2}) at three λ, judged at three standard
/// errors, and the distribution of a four-increment sum against the
/// 4^{2/3}-scaled single draw.
pub fn stable_scaling_rows(
    seed: u64,
    draws: usize,
    ks_draws: usize,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(draws >= 100, "draws must be at least 100")?;
    require(ks_draws >= 100, "ks-draws must be at least 100")?;
    const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];
    const CHUNK: usize = 10_000;

    let chunks = draws.div_ceil(CHUNK) as u32;
    let partials: Vec<[(f64, f64); 3]> = run_replicas(threads, chunks, |c| {
        let mut rng = derive_stream(seed, stream_id(exp::STABLE_SCALING, c, 0));
        let len = CHUNK.min(draws - (c as usize) * CHUNK);
        let mut sums = [(0.0f64, 0.0f64); 3];
        for _ in 0..len {
            let s = sample_stable32(&mut rng);
            for (j, &lam) in LAMBDAS.iter().enumerate() {
                let e = (lam * s).exp();
                sums[j].0 += e;
                sums[j].1 += e * e;
            }
        }
        sums
    })?;
    let mut rows = Vec::new();
    for (j, &lam) in LAMBDAS.iter().enumerate() {
        let sum: f64 = partials.iter().map(|p| p[j].0).sum();
        let sum2: f64 = partials.iter().map(|p| p[j].1).sum();
        let n = draws as f64;
        let mean = sum / n;
        let var = (sum2 / n - mean * mean) * n / (n - 1.0);
        let se = (var / n).sqrt();
        rows.push(checked(
            format!("laplace_lambda{lam}"),
            mean,
            Some(se),
            Target::new(format!("exp({lam}^(3/2))"), lam.powf(1.5).exp()),
            3.0 * se,
        ));
    }

    let ks_chunks = ks_draws.div_ceil(CHUNK) as u32;
    let draw_chunked = |substream: u8, f: &(dyn Fn(&mut dyn FnMut() -> f64) -> f64 + Sync)| {
        run_replicas(threads, ks_chunks, |c| {
            let mut rng = derive_stream(seed, stream_id(exp::STABLE_SCALING, c, substream));
            let len = CHUNK.min(ks_draws - (c as usize) * CHUNK);
            (0..len)
                .map(|_| f(&mut || sample_stable32(&mut rng)))
                .collect::<Vec<f64>>()
        })
        .map(|v| v.into_iter().flatten().collect::<Vec<f64>>())
    };
    let four_step = draw_chunked(1, &|draw| draw() + draw() + draw() + draw())?;
    let scaled = draw_chunked(2, &|draw| 4f64.powf(2.0 / 3.0) * draw())?;
    let d = ks_distance_two_sample(&four_step, &scaled)
        .map_err(|e| invalid(format!("distance computation failed: {e}")))?;
    rows.push(checked(
        "scaling_ks",
        d,
        None,
        Target::new("0 (same law)", 0.0),
        0.01,
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Hull-growth sanity (run inside accept-all)
// ---------------------------------------------------------------------------

/// Growth checks of the physical hull integrator: the squared left spread
/// averages 10t at fixed times, and the log-spread grows at exponent 1/2
/// over two decades.
pub fn triple_sanity_rows(
    seed: u64,
    mean_replicas: u32,
    dt: f64,
    slope_replicas: u32,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    require(mean_replicas >= 2, "replicas must be at least 2")?;
    require(slope_replicas >= 1, "replicas must be at least 1")?;
    require(dt > 0.0 && dt.is_finite(), "dt must be positive")?;
    const T_CHECKS: [f64; 3] = [0.5, 1.0, 2.0];
    let per_replica: Vec<[f64; 3]> = run_replicas(threads, mean_replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::TRIPLE_SANITY, i, 0));
        let mut state = TripleState::from_coordinates(0.0, 0.0, 0.0, 0.0);
        let mut out = [0.0; 3];
        for (j, &t_star) in T_CHECKS.iter().enumerate() {
            run_triple_to(&mut state, t_star, dt, &mut rng).expect("positive step");
            out[j] = state.g;
        }
        out
    })?;
    let mut rows = Vec::new();
    for (j, &t_star) in T_CHECKS.iter().enumerate() {
        let samples: Vec<f64> = per_replica.iter().map(|r| r[j]).collect();
        let s = MeanStderr::from_samples(&samples);
        rows.push(checked(
            format!("spread_mean_t{t_star}"),
            s.mean,
            Some(s.stderr),
            Target::new(format!("10*{t_star}"), 10.0 * t_star),
            3.0 * s.stderr,
        ));
    }

    const CHECKPOINTS: [f64; 3] = [10.0, 100.0, 1000.0];
    let log_spreads: Vec<[f64; 3]> = run_replicas(threads, slope_replicas, |i| {
        let mut rng = derive_stream(seed, stream_id(exp::TRIPLE_SANITY, i, 1));
        let mut state = TripleState::from_coordinates(0.0, 0.0, 0.0, 0.0);
        let mut out = [0.0; 3];
        for (j, &t_star) in CHECKPOINTS.iter().enumerate() {
            while state.t < t_star {
                let delta2 = state.delta().powi(2);
                let step = (1e-3 * delta2.max(1e-4)).min(t_star - state.t);
                step_triple(&mut state, step, &mut rng).expect("positive step");
            }
            out[j] = state.delta().ln();
        }
        out
    })?;
    let n = slope_replicas as f64;
    let xs: Vec<f64> = CHECKPOINTS.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = (0..3)
        .map(|j| log_spreads.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let x_mean = xs.iter().sum::<f64>() / 3.0;
    let y_mean = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum::<f64>()
        / xs.iter().map(|x| (x - x_mean).powi(2)).sum::<f64>();
    rows.push(checked(
        "log_spread_slope",
        slope,
        None,
        Target::new("1/2", 0.5),
        0.05,
    ));
    Ok(rows)
}

// ---------------------------------------------------------------------------
// The combined suite
// ---------------------------------------------------------------------------

/// Scales for one `accept-all` profile. `quick` is a smoke profile sized
/// for seconds-scale CI runs (some statistical windows are too tight at
/// these counts and may fail; the run is still deterministic); `desk` is
/// the acceptance scale; `full` additionally runs the discrete count at
/// its asymptotic depth, which takes hours.
struct Scales {
    peel_k_max: u64,
    laplace_draws: usize,
    laplace_ks_draws: usize,
    walk_n: usize,
    walk_replicas: u32,
    walk_reference: usize,
    fuzz_seeds: u32,
    fuzz_steps: u64,
    chain_k: u64,
    chain_replicas: u32,
    chain_pairs: u32,
    chain_ks_draws: usize,
    comstable_log_x: f64,
    comstable_replicas: u32,
    cdis_n: u64,
    cdis_replicas: u32,
    cdis_budget: u64,
    t1_replicas: u32,
    ergodic_replicas: u32,
    ergodic_r_end: f64,
    theta_n_hits: u64,
    theta_replicas: u32,
    theta_budget: u64,
    comsle_replicas: u32,
    comsle_agreement: u32,
    comsle_step_scale: f64,
    comsle_budget: u64,
    triple_mean_replicas: u32,
    triple_dt: f64,
    triple_slope_replicas: u32,
}

impl Scales {
    fn for_profile(profile: Profile) -> Scales {
        let desk = Scales {
            peel_k_max: 1_000_000,
            laplace_draws: 1_000_000,
            laplace_ks_draws: 1_000_000,
            walk_n: 10_000,
            walk_replicas: 10_000,
            walk_reference: 100_000,
            fuzz_seeds: 100,
            fuzz_steps: 500,
            chain_k: 1_000,
            chain_replicas: 1_000,
            chain_pairs: 100,
            chain_ks_draws: 200_000,
            comstable_log_x: 40.0,
            comstable_replicas: 10_000,
            cdis_n: 10_000,
            cdis_replicas: 500,
            cdis_budget: 100_000_000,
            t1_replicas: 20_000,
            ergodic_replicas: 8,
            ergodic_r_end: 200.0,
            theta_n_hits: 50,
            theta_replicas: 200,
            theta_budget: 100_000_000,
            comsle_replicas: 2_000,
            comsle_agreement: 1_000,
            comsle_step_scale: 1e-4,
            comsle_budget: 100_000_000,
            triple_mean_replicas: 20_000,
            triple_dt: 0.01,
            triple_slope_replicas: 200,
        };
        match profile {
            Profile::Desk => desk,
            Profile::Quick => Scales {
                laplace_draws: 100_000,
                laplace_ks_draws: 50_000,
                walk_n: 2_000,
                walk_replicas: 1_000,
                walk_reference: 10_000,
                fuzz_seeds: 20,
                fuzz_steps: 300,
                chain_k: 200,
                chain_replicas: 500,
                chain_pairs: 50,
                chain_ks_draws: 50_000,
                comstable_replicas: 500,
                cdis_n: 2_000,
                cdis_replicas: 100,
                t1_replicas: 500,
                ergodic_replicas: 4,
                ergodic_r_end: 40.0,
                theta_n_hits: 20,
                theta_replicas: 30,
                comsle_replicas: 200,
                comsle_agreement: 200,
                triple_mean_replicas: 5_000,
                triple_slope_replicas: 60,
                ..desk
            },
            Profile::Full => Scales {
                cdis_n: 1_000_000,
                cdis_budget: 100_000_000_000,
                chain_ks_draws: 1_000_000,
                ..desk
            },
        }
    }
}

/// Runs every suite experiment at the profile's scales and returns all the
/// rows with `cNN_` prefixes. The dimension rows reuse the rate estimates
/// already computed for the chain and hit-rate sections rather than
/// re-simulating them.
pub fn accept_all_rows(
    seed: u64,
    profile: Profile,
    threads: usize,
) -> Result<Vec<Estimate>, RunError> {
    let s = Scales::for_profile(profile);
    let mut rows = Vec::new();
    let push = |prefix: &str, batch: Vec<Estimate>, rows: &mut Vec<Estimate>| {
        for mut e in batch {
            e.name = format!("{prefix}_{}", e.name);
            rows.push(e);
        }
    };

    push("c01", peel_moments_rows(s.peel_k_max)?, &mut rows);
    push(
        "c02",
        stable_scaling_rows(seed, s.laplace_draws, s.laplace_ks_draws, threads)?,
        &mut rows,
    );
    push(
        "c03",
        walk_ks_rows(
            seed,
            exp::PEEL_KS,
            PolicyId::PredictedEdge,
            s.walk_n,
            s.walk_replicas,
            s.walk_reference,
            threads,
        )?,
        &mut rows,
    );
    push(
        "c04",
        walk_ks_rows(
            seed,
            exp::PERCO_KS,
            PolicyId::Percolation,
            s.walk_n,
            s.walk_replicas,
            s.walk_reference,
            threads,
        )?,
        &mut rows,
    );
    push(
        "c05",
        ledger_fuzz_rows(seed, s.fuzz_seeds, s.fuzz_steps, threads)?,
        &mut rows,
    );

    let xi = xi_rate_estimate(seed, s.chain_k, s.chain_replicas, threads)?;
    push("c06", chain_rate_rows_from(&xi), &mut rows);
    push(
        "c06",
        chain_checks_rows(seed, s.chain_pairs, s.chain_ks_draws)?,
        &mut rows,
    );
    push(
        "c07",
        comstable_rows(seed, s.comstable_log_x, s.comstable_replicas, threads)?,
        &mut rows,
    );
    push(
        "c07",
        cdis_rows(
            seed,
            s.cdis_n,
            (-4.0f64).exp(),
            s.cdis_replicas,
            s.cdis_budget,
            threads,
        )?,
        &mut rows,
    );
    push("c08", z_t1_rows(seed, s.t1_replicas, threads)?, &mut rows);
    push(
        "c08",
        z_ergodic_rows(seed, s.ergodic_replicas, s.ergodic_r_end, threads)?,
        &mut rows,
    );
    push("c08", rho_checks_rows()?, &mut rows);

    let theta = theta_rate_estimates(seed, s.theta_n_hits, s.theta_replicas, s.theta_budget, threads)?;
    push("c09", theta_rate_rows_from(&theta), &mut rows);
    push(
        "c10",
        comsle_rows(
            seed,
            &[3.0, 4.0, 5.0],
            s.comsle_step_scale,
            s.comsle_replicas,
            s.comsle_agreement,
            s.comsle_budget,
            threads,
        )?,
        &mut rows,
    );
    push(
        "c11",
        triple_sanity_rows(seed, s.triple_mean_replicas, s.triple_dt, s.triple_slope_replicas, threads)?,
        &mut rows,
    );
    push(
        "c12",
        dimension_rows(xi.mean, Some(xi.stderr), theta[0].mean, Some(theta[0].stderr)),
        &mut rows,
    );
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Resolves the merged configuration for the parsed command line, runs the
/// experiment, and assembles the report. The report's config map holds
/// every resolved tunable except execution details (threads, paths,
/// rendering), so identical computations serialize identically.
pub fn run(cli: &Cli) -> Result<Report, RunError> {
    let start = Instant::now();
    let file = FileConfig::load(cli.common.config.as_deref())?;
    let mut merge = Merge::new(&file);
    let seed = merge.pick("seed", cli.common.seed, 1u64)?;
    let threads = cli.common.threads;

    let estimates = match &cli.command {
        Command::PeelMoments { k_max } => {
            let k_max = merge.pick("k-max", *k_max, 1_000_000u64)?;
            peel_moments_rows(k_max)?
        }
        Command::PeelKs { n, reference } => {
            let n = merge.pick("n", *n, 10_000usize)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 10_000u32)?;
            let reference = merge.pick("reference", *reference, 100_000usize)?;
            walk_ks_rows(seed, exp::PEEL_KS, PolicyId::PredictedEdge, n, replicas, reference, threads)?
        }
        Command::PercoKs { n, reference } => {
            let n = merge.pick("n", *n, 10_000usize)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 10_000u32)?;
            let reference = merge.pick("reference", *reference, 100_000usize)?;
            walk_ks_rows(seed, exp::PERCO_KS, PolicyId::Percolation, n, replicas, reference, threads)?
        }
        Command::LedgerFuzz { seeds, steps_per_seed } => {
            let seeds = merge.pick("seeds", *seeds, 100u32)?;
            let steps = merge.pick("steps-per-seed", *steps_per_seed, 500u64)?;
            ledger_fuzz_rows(seed, seeds, steps, threads)?
        }
        Command::Cdis { n, eps } => {
            let n = merge.pick("n", *n, 10_000u64)?;
            let eps = merge.pick("eps", *eps, (-4.0f64).exp())?;
            let replicas = merge.pick("replicas", cli.common.replicas, 500u32)?;
            let budget = merge.pick("budget", cli.common.budget, 100_000_000u64)?;
            cdis_rows(seed, n, eps, replicas, budget, threads)?
        }
        Command::ChainRate { k } => {
            let k = merge.pick("k", *k, 1_000u64)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 1_000u32)?;
            chain_rate_rows_from(&xi_rate_estimate(seed, k, replicas, threads)?)
        }
        Command::ChainChecks { pairs, ks_draws } => {
            let pairs = merge.pick("pairs", *pairs, 100u32)?;
            let ks_draws = merge.pick("ks-draws", *ks_draws, 200_000usize)?;
            chain_checks_rows(seed, pairs, ks_draws)?
        }
        Command::Comstable { log_x } => {
            let log_x = merge.pick("log-x", *log_x, 40.0f64)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 10_000u32)?;
            comstable_rows(seed, log_x, replicas, threads)?
        }
        Command::ZT1 {} => {
            let replicas = merge.pick("replicas", cli.common.replicas, 20_000u32)?;
            z_t1_rows(seed, replicas, threads)?
        }
        Command::ZErgodic { r_end } => {
            let r_end = merge.pick("r-end", *r_end, 200.0f64)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 8u32)?;
            z_ergodic_rows(seed, replicas, r_end, threads)?
        }
        Command::ThetaRate { n_hits } => {
            let n_hits = merge.pick("n-hits", *n_hits, 50u64)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 200u32)?;
            let budget = merge.pick("budget", cli.common.budget, 100_000_000u64)?;
            theta_rate_rows_from(&theta_rate_estimates(seed, n_hits, replicas, budget, threads)?)
        }
        Command::Comsle { log_targets, step_scale, agreement_replicas } => {
            let log_targets = merge.pick_list("log-targets", log_targets.clone(), &[3.0, 4.0, 5.0])?;
            let step_scale = merge.pick("step-scale", *step_scale, 1e-4f64)?;
            let replicas = merge.pick("replicas", cli.common.replicas, 2_000u32)?;
            let agreement = merge.pick("agreement-replicas", *agreement_replicas, 1_000u32)?;
            let budget = merge.pick("budget", cli.common.budget, 100_000_000u64)?;
            comsle_rows(seed, &log_targets, step_scale, replicas, agreement, budget, threads)?
        }
        Command::RhoChecks {} => rho_checks_rows()?,
        Command::Dimension { rate_xi, rate_theta } => {
            let rate_xi_in = merge.pick_optional("rate-xi", *rate_xi)?;
            let rate_theta_in = merge.pick_optional("rate-theta", *rate_theta)?;
            for (key, value) in [("rate-xi", rate_xi_in), ("rate-theta", rate_theta_in)] {
                if let Some(v) = value {
                    require(v > 0.0 && v.is_finite(), &format!("{key} must be positive"))?;
                }
            }
            let (xi, se_xi) = match rate_xi_in {
                Some(v) => (v, None),
                None => {
                    let k = merge.pick("k", None, 1_000u64)?;
                    let replicas = merge.pick("replicas", cli.common.replicas, 1_000u32)?;
                    let est = xi_rate_estimate(seed, k, replicas, threads)?;
                    (est.mean, Some(est.stderr))
                }
            };
            let (theta, se_theta) = match rate_theta_in {
                Some(v) => (v, None),
                None => {
                    let n_hits = merge.pick("n-hits", None, 50u64)?;
                    let budget = merge.pick("budget", cli.common.budget, 100_000_000u64)?;
                    let est = theta_rate_estimates(seed, n_hits, 200, budget, threads)?;
                    (est[0].mean, Some(est[0].stderr))
                }
            };
            dimension_rows(xi, se_xi, theta, se_theta)
        }
        Command::AcceptAll { profile } => {
            let profile = merge.pick("profile", *profile, Profile::Desk)?;
            accept_all_rows(seed, profile, threads)?
        }
    };

    if let Some(path) = &cli.common.dump {
        write_dump(path, cli, seed, &merge)?;
    }

    let mut config = merge.effective;
    config.remove("seed"); // the report carries the seed as its own field
    Ok(Report {
        version: REPORT_VERSION,
        experiment: cli.command.name().to_string(),
        config,
        estimates,
        seed,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// The documented per-experiment sample dumps. Replica 0's object is
/// regenerated from its own stream, so the CSV matches what the report
/// aggregated; trace-style dumps use a dedicated substream.
fn write_dump(path: &std::path::Path, cli: &Cli, seed: u64, merge: &Merge) -> Result<(), RunError> {
    let file = File::create(path)
        .map_err(|e| invalid(format!("cannot create dump file {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    let io_err = |e: std::io::Error| invalid(format!("cannot write dump file: {e}"));
    let parse = |key: &str| -> f64 {
        merge.effective[key].parse().expect("resolved values re-parse")
    };
    match &cli.command {
        Command::PeelKs { .. } | Command::PercoKs { .. } => {
            let (code, policy) = if matches!(cli.command, Command::PeelKs { .. }) {
                (exp::PEEL_KS, PolicyId::PredictedEdge)
            } else {
                (exp::PERCO_KS, PolicyId::Percolation)
            };
            let n = parse("n") as usize;
            let walk = run_walk(n, policy, derive_stream(seed, stream_id(code, 0, 0)));
            walk.write_csv(&mut out).map_err(io_err)?;
        }
        Command::ChainRate { .. } => {
            let k = parse("k") as u64;
            let mut rng = derive_stream(seed, stream_id(exp::CHAIN_RATE, 0, 1));
            let mut chain = RecordChain::equilibrated(&mut rng);
            let trace = peelab_stable::run_trace(&mut chain, &mut rng, k);
            peelab_stable::write_trace_csv(&mut out, &trace).map_err(io_err)?;
        }
        Command::ZErgodic { .. } => {
            let r_end = parse("r-end");
            let mut rng = derive_stream(seed, stream_id(exp::Z_ERGODIC, 0, 1));
            let z0 = sample_rho(&mut rng);
            let trace =
                peelab_sle::logtime::run_trace(&mut rng, &StepControl::default(), z0, r_end, 2_000)
                    .map_err(|e| invalid(format!("trace failed: {e}")))?;
            peelab_sle::logtime::write_trace_csv(&mut out, &trace).map_err(io_err)?;
        }
        Command::ThetaRate { .. } => {
            let n_hits = parse("n-hits") as usize;
            let mut rng = derive_stream(seed, stream_id(exp::THETA_RATE, 0, 1));
            let z0 = sample_rho(&mut rng);
            let mut state = LogTimeState::from_position(z0)
                .map_err(|e| invalid(format!("trace failed: {e}")))?;
            let mut events = Vec::new();
            while events.len() < n_hits {
                events.extend(step_z_with(&mut state, 0.01, &mut rng, &StepControl::default()));
            }
            peelab_sle::logtime::write_touch_log_csv(&mut out, &events).map_err(io_err)?;
        }
        _ => {
            return Err(invalid(
                "--dump is not supported for this experiment (documented dumps: \
                 peel-ks, perco-ks, chain-rate, z-ergodic, theta-rate)",
            ))
        }
    }
    Ok(())
}

/// Renders the finished report to stdout and `--out`, returning the
/// process exit code (0 all checks pass, 1 otherwise).
pub fn emit(report: &Report, cli: &Cli) -> Result<i32, RunError> {
    let csv = matches!(cli.common.format, Format::Csv);
    report
        .write_rendered(std::io::stdout().lock(), csv)
        .map_err(|e| invalid(format!("cannot write to stdout: {e}")))?;
    if let Some(path) = &cli.common.out {
        let file = File::create(path)
            .map_err(|e| invalid(format!("cannot create {}: {e}", path.display())))?;
        report
            .write_rendered(BufWriter::new(file), csv)
            .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}
