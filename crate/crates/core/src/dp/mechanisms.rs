use rand::Rng;

use super::Histogram;
use crate::error::{Error, Result};

/// Pure epsilon-DP budget.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PrivacyBudget(f64);

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(Self(epsilon))
        } else {
            Err(Error::InvalidParameter(format!("epsilon must be positive and finite, got {epsilon}")))
        }
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }

    /// Even split into `parts` sequentially composed pieces.
    pub fn split(self, parts: u32) -> Self {
        Self(self.0 / f64::from(parts.max(1)))
    }
}

/// One draw from the zero-centred Laplace distribution, by inverse CDF.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParameter(format!("Laplace scale must be positive, got {scale}")));
    }
    // u in (-1/2, 1/2); the open lower end keeps ln() finite
    let u: f64 = loop {
        let u = rng.gen::<f64>() - 0.5;
        if u > -0.5 {
            break u;
        }
    };
    Ok(-scale * u.signum() * (1.0 - 2.0 * u.abs()).ln())
}

/// Selection probabilities of the exponential mechanism with unit score
/// sensitivity: `p_i ∝ exp(eps * s_i / 2)`, max-shifted before exponentiating.
pub fn exponential_probabilities(scores: &[f64], budget: PrivacyBudget) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidParameter("exponential mechanism needs at least one score".into()));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter(format!("score {s} is not finite")));
    }
    let half_eps = budget.epsilon() / 2.0;
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (half_eps * (s - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

pub fn exponential_select<R: Rng + ?Sized>(scores: &[f64], budget: PrivacyBudget, rng: &mut R) -> Result<usize> {
    let probs = exponential_probabilities(scores, budget)?;
    Ok(sample_index(&probs, rng))
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left the cumulative sum a hair below 1
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Exact k-ary randomized response probability table, `table[input][output]`.
pub fn k_rr_table(k: usize, budget: PrivacyBudget) -> Result<Vec<Vec<f64>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k-RR needs at least 2 bins, got {k}")));
    }
    let e = budget.epsilon().exp();
    if e.is_infinite() {
        return Ok((0..k).map(|i| (0..k).map(|o| if i == o { 1.0 } else { 0.0 }).collect()).collect());
    }
    let other = 1.0 / (e + (k - 1) as f64);
    // keep = e * other rather than e / (e + k - 1): the ratio keep/other is then e^eps bit for bit
    let keep = e * other;
    Ok((0..k)
        .map(|i| (0..k).map(|o| if i == o { keep } else { other }).collect())
        .collect())
}

/// k-ary randomized response: the true bin with probability
/// `e^eps / (e^eps + k - 1)`, otherwise a uniformly random other bin.
pub fn k_rr<R: Rng + ?Sized>(true_bin: usize, k: usize, budget: PrivacyBudget, rng: &mut R) -> Result<usize> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k-RR needs at least 2 bins, got {k}")));
    }
    if true_bin >= k {
        return Err(Error::InvalidParameter(format!("bin {true_bin} out of range for k = {k}")));
    }
    let keep = 1.0 / (1.0 + (k - 1) as f64 * (-budget.epsilon()).exp());
    if rng.gen::<f64>() < keep {
        return Ok(true_bin);
    }
    let other = rng.gen_range(0..k - 1);
    Ok(if other >= true_bin { other + 1 } else { other })
}

/// Checks `P[out | in] <= e^eps * P[out | in']` for every pair of inputs and
/// every output of a mechanism given as a row-stochastic table.
pub fn dp_ratio_check(table: &[Vec<f64>], budget: PrivacyBudget) -> Result<bool> {
    let Some(first) = table.first() else {
        return Err(Error::InvalidParameter("empty mechanism table".into()));
    };
    let outputs = first.len();
    for (i, row) in table.iter().enumerate() {
        if row.len() != outputs || outputs == 0 {
            return Err(Error::InvalidParameter(format!("row {i} has {} entries, expected {outputs}", row.len())));
        }
        if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter(format!("row {i} has a non-probability entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("row {i} sums to {sum}, not 1")));
        }
    }
    let e = budget.epsilon().exp();
    Ok((0..outputs).all(|o| {
        let max = table.iter().map(|r| r[o]).fold(f64::NEG_INFINITY, f64::max);
        let min = table.iter().map(|r| r[o]).fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            max == 0.0
        } else {
            max <= e * min
        }
    }))
}

/// Replaces `true_value` by a uniform draw from the released histogram's bin
/// that contains it. Out-of-domain values are clamped to the nearest bin.
pub fn perturb_context<R: Rng + ?Sized>(true_value: f64, released: &Histogram, rng: &mut R) -> Result<f64> {
    if released.bin_count() == 0 {
        return Err(Error::InvalidParameter("degenerate histogram".into()));
    }
    if !true_value.is_finite() {
        return Err(Error::InvalidParameter(format!("context value {true_value} is not finite")));
    }
    let bin = released.bin_of(true_value);
    Ok(uniform_in_bin(released, bin, rng))
}

/// Uniform draw from bin `bin`, guaranteed to map back to the same bin.
pub(crate) fn uniform_in_bin<R: Rng + ?Sized>(hist: &Histogram, bin: usize, rng: &mut R) -> f64 {
    let (lo, hi) = hist.bin_range(bin);
    for _ in 0..8 {
        let v = rng.gen_range(lo..hi);
        if hist.bin_of(v) == bin {
            return v;
        }
    }
    0.5 * (lo + hi)
}
