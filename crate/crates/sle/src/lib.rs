//! Diffusion backends for the bouncing exploration interface.
//!
//! Two complementary simulations of the same object:
//!
//! * [`triple`] — the physical-time coordinate triple (left spread G, tip
//!   U, right spread D) with marked boundary points, used for moment
//!   checks and for commuting counts read directly off swallow times.
//! * [`logtime`] — the normalized interface position Z ∈ [0, 1] driven in
//!   r-time (log-capacity time), which compresses the exponential growth
//!   of the physical clock into additive functionals and makes deep
//!   alternated-hit statistics affordable.
//!
//! Both are anchored to closed forms: the stationary law and scale
//! function in [`measures`], and the mean-hitting-time ODE in [`ode`].

pub mod logtime;
pub mod measures;
pub mod ode;
pub mod triple;

pub use logtime::{
    boundary_crossing_time, ergodic_inverse_gap_average, first_hit_of_one_from, step_z,
    step_z_with, t1_statistics, theta_rate, HitEvent, LogTimeError, LogTimeState, StepControl,
    ThetaRateSample,
};
pub use measures::{rho_checks, rho_density, sample_rho, scale_function, scale_span, RhoChecks};
pub use ode::{f_ode_oracle, f_series, t1_constant, OdeSolution};
pub use triple::{
    comsle_direct, run_triple_to, step_triple, CommutingSample, MarkedPoint, StepReport, Swallow,
    TripleError, TripleState,
};
