//! Command-line laboratory over the workspace's samplers and integrators.
//!
//! Each subcommand runs one experiment and emits a versioned report whose
//! estimate rows carry their targets in closed form; `accept-all` chains
//! every experiment at a chosen scale profile. Reports depend only on the
//! seed and the resolved configuration — never on the thread count — and
//! the `elapsed_s` field is the only part that varies between identical
//! runs.

pub mod config;
pub mod experiments;
pub mod report;
