//! Log-scale record cascade: the gap chain, its invariant and excursion
//! measures, and the commuting-count estimators.
//!
//! Records of the walks in `peelab-peeling` thin out geometrically, so their
//! asymptotics live on the log scale. This crate provides that limit
//! object directly: a Markov chain on record-depth gaps whose stationary
//! throughput π/√3 per step converts a target depth into an expected
//! number of commuting records. The companion measures (`varpi`, `nu`, the
//! transition kernel) come with quadrature self-checks, and every sampler
//! is exact — no discretization error anywhere in this crate.

pub mod chain;
pub mod measures;

pub use chain::{
    comstable_estimate, comstable_rate_constant, comstable_replica, estimate_xi_rate,
    run_trace, sample_record_gap, write_trace_csv, xi_rate_replica, ChainRow, RecordChain,
};
pub use measures::{
    invariance_residual, invariant_mean_gap, kernel_density, kernel_mass_defect, nu_density,
    nu_tail, nu_tail_defect, reversibility_residual, sample_varpi, sample_xi_one, varpi_density,
    varpi_mass_defect, varpi_mean_defect,
};
