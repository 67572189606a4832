//! Exact peeling of the uniform infinite half-planar triangulation:
//! the one-step law, horodistance walks under pluggable exploration
//! policies, an edge-level boundary ledger used as an independent oracle,
//! and record/commuting statistics of the walks.
//!
//! All walk state is exact (half-integers as doubled machine integers);
//! floating point enters only when sampling and when rescaling finished
//! walks toward their stable limit.

pub mod form;
pub mod halfint;
pub mod ledger;
pub mod records;
pub mod sampler;
pub mod walk;

pub use form::{delta_minus, delta_plus, q_envelope, q_left, q_partial_sums, Form, FormError};
pub use halfint::HalfInt;
pub use ledger::{BoundaryLedger, Label, LedgerError, SwallowReport};
pub use records::{
    c_dis, commuting_count_at_level, interlaced_record_gaps, tau_chain, tau_plus, CommutingCount,
    CommutingError, RecordChainScanner, TauChain,
};
pub use sampler::{sample_form, shared_sampler, FormDraw, FormSampler};
pub use walk::{
    rescale_walk, run_walk, HorodistanceWalk, PolicyId, RescaledWalk, StepEvent, WalkEngine,
    WalkError,
};
