//! Privacy machinery: Laplace and exponential mechanisms, MWEM histogram
//! release, bin-range context perturbation and k-ary randomized response.

mod fixtures;
mod histogram;
mod mechanisms;
mod mwem;

pub use fixtures::{load_histogram, load_queries, parse_histogram, parse_queries, write_histogram};
pub use histogram::{dyadic_level_queries, interval_queries, Histogram, LinearQuery};
pub use mechanisms::{
    dp_ratio_check, exponential_probabilities, exponential_select, k_rr, k_rr_table, laplace_sample,
    perturb_context, PrivacyBudget,
};
pub use mwem::{mwem, mwem_error_bound};

/// A context report as seen by the decision center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedContext {
    pub reported_position: f64,
    pub reported_speed: f64,
}
