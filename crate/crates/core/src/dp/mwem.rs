//! Multiplicative weights with the exponential mechanism (MWEM).
//!
//! Starting from the uniform histogram of the same mass, each round picks a
//! badly-approximated query with the exponential mechanism, measures it with
//! Laplace noise, and folds the measurement in by a multiplicative-weights
//! update. Each round spends `eps / (2T)` on selection and `eps / (2T)` on
//! measurement.

use rand::Rng;

use super::mechanisms::{exponential_select, laplace_sample};
use super::{Histogram, LinearQuery, PrivacyBudget};
use crate::error::{Error, Result};

pub fn mwem<R: Rng + ?Sized>(
    true_hist: &Histogram,
    queries: &[LinearQuery],
    iterations: u32,
    budget: PrivacyBudget,
    rng: &mut R,
) -> Result<Histogram> {
    if queries.is_empty() {
        return Err(Error::InvalidParameter("MWEM needs a non-empty query set".into()));
    }
    if iterations < 1 {
        return Err(Error::InvalidParameter("MWEM needs at least one iteration".into()));
    }
    let bins = true_hist.bin_count();
    if let Some(q) = queries.iter().find(|q| q.weights().len() != bins) {
        return Err(Error::InvalidParameter(format!(
            "query has {} weights but the histogram has {bins} bins",
            q.weights().len()
        )));
    }
    let n = true_hist.total_mass();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("MWEM input mass must be positive, got {n}")));
    }

    let t = f64::from(iterations);
    let round_budget = budget.split(2 * iterations);
    let laplace_scale = 2.0 * t / budget.epsilon();
    let truth: Vec<f64> = queries.iter().map(|q| q.eval(true_hist)).collect();

    let mut log_weights = vec![0.0; bins];
    let mut approx = vec![n / bins as f64; bins];

    for _ in 0..iterations {
        let scores: Vec<f64> = queries
            .iter()
            .zip(&truth)
            .map(|(q, b)| (q.eval_counts(&approx) - b).abs())
            .collect();
        let pick = exponential_select(&scores, round_budget, rng)?;
        let query = &queries[pick];
        let measured = truth[pick] + laplace_sample(laplace_scale, rng)?;
        let error = measured - query.eval_counts(&approx);
        for (lw, w) in log_weights.iter_mut().zip(query.weights()) {
            *lw += w * error / (2.0 * n);
        }
        approx = normalized(&log_weights, n);
    }
    Ok(true_hist.with_counts(approx))
}

fn normalized(log_weights: &[f64], mass: f64) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| mass * x / total).collect()
}

/// Accuracy bound `2n sqrt(ln|D| / T) + 10 T ln|Q| / eps` on the worst query error.
pub fn mwem_error_bound(mass: f64, domain_size: usize, query_count: usize, iterations: u32, budget: PrivacyBudget) -> f64 {
    let t = f64::from(iterations);
    2.0 * mass * ((domain_size as f64).ln() / t).sqrt() + 10.0 * t * (query_count as f64).ln() / budget.epsilon()
}
