//! Numerical foundations shared by the peeling laboratory crates.
//!
//! This crate bundles the deterministic random-number plumbing, the special
//! samplers (totally skewed 3/2-stable increments, squared Bessel
//! transitions, Beta variates), double-exponential quadrature with
//! endpoint-singularity support, Kolmogorov–Smirnov statistics, and a
//! log-space accumulator for quantities that overflow `f64`.
//!
//! Everything here is a pure function of its inputs: samplers take an
//! explicit generator, there is no global state, and two streams derived
//! from the same `(master_seed, stream_id)` pair replay identically.

pub mod dist;
pub mod ks;
pub mod logsum;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stable;
pub mod summary;

pub use dist::{besq_bridge_no_touch_prob, besq_first_passage_prob, besq_step, sample_beta};
pub use ks::{ks_distance_cdf, ks_distance_density, ks_distance_two_sample};
pub use logsum::LogAccumulator;
pub use quad::{integrate, integrate_to_inf, QuadError};
pub use rng::{derive_stream, RngStream};
pub use stable::{sample_stable32, sample_stable32_at};
pub use summary::MeanStderr;
