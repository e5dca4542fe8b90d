//! Privacy-aware task offloading for vehicular edge computing.
//!
//! Vehicles report perturbed context (position, speed) to a decision center,
//! which jointly selects edge servers and allocates compute with a
//! branch-and-bound search. A discrete-time simulator measures the resulting
//! latency reduction rate and task throughput.

pub mod dp;
pub mod error;
pub mod io;
pub mod latency;
pub mod mobility;
pub mod optimizer;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
