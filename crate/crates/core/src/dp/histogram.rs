use crate::error::{Error, Result};

/// Binned counts over a bounded one-dimensional domain with uniform bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    domain_lo: f64,
    domain_hi: f64,
    counts: Vec<f64>,
}

impl Histogram {
    pub fn new(domain_lo: f64, domain_hi: f64, counts: Vec<f64>) -> Result<Self> {
        if !(domain_lo.is_finite() && domain_hi.is_finite() && domain_hi > domain_lo) {
            return Err(Error::InvalidParameter(format!(
                "histogram domain [{domain_lo}, {domain_hi}] is empty or not finite"
            )));
        }
        if counts.is_empty() {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        if let Some(c) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParameter(format!("histogram count {c} is not a finite non-negative value")));
        }
        Ok(Self {
            domain_lo,
            domain_hi,
            counts,
        })
    }

    pub fn zeros(domain_lo: f64, domain_hi: f64, bin_count: usize) -> Result<Self> {
        Self::new(domain_lo, domain_hi, vec![0.0; bin_count])
    }

    /// Histogram of `values`, each clamped into the domain.
    pub fn from_values(domain_lo: f64, domain_hi: f64, bin_count: usize, values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut h = Self::zeros(domain_lo, domain_hi, bin_count)?;
        for v in values {
            let b = h.bin_of(v);
            h.counts[b] += 1.0;
        }
        Ok(h)
    }

    pub fn domain_lo(&self) -> f64 {
        self.domain_lo
    }

    pub fn domain_hi(&self) -> f64 {
        self.domain_hi
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn bin_width(&self) -> f64 {
        (self.domain_hi - self.domain_lo) / self.counts.len() as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Bin containing `v`; values outside the domain land in the nearest edge bin.
    pub fn bin_of(&self, v: f64) -> usize {
        let idx = ((v - self.domain_lo) / self.bin_width()).floor();
        if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(self.counts.len() - 1)
        }
    }

    /// Half-open value range `[lo, hi)` of bin `b`.
    pub fn bin_range(&self, b: usize) -> (f64, f64) {
        let w = self.bin_width();
        let lo = self.domain_lo + b as f64 * w;
        let hi = if b + 1 == self.counts.len() {
            self.domain_hi
        } else {
            self.domain_lo + (b + 1) as f64 * w
        };
        (lo, hi)
    }

    pub(crate) fn with_counts(&self, counts: Vec<f64>) -> Self {
        debug_assert_eq!(counts.len(), self.counts.len());
        Self {
            domain_lo: self.domain_lo,
            domain_hi: self.domain_hi,
            counts,
        }
    }
}

/// Linear query with weights in `[-1, 1]`, one per histogram bin.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQuery {
    weights: Vec<f64>,
}

impl LinearQuery {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("query needs at least one weight".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(-1.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!("query weight {w} outside [-1, 1]")));
        }
        Ok(Self { weights })
    }

    /// Indicator of bins `start..end`.
    pub fn interval(bin_count: usize, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > bin_count {
            return Err(Error::InvalidParameter(format!(
                "interval {start}..{end} invalid for {bin_count} bins"
            )));
        }
        let weights = (0..bin_count).map(|i| if (start..end).contains(&i) { 1.0 } else { 0.0 }).collect();
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, h: &Histogram) -> f64 {
        self.eval_counts(h.counts())
    }

    pub(crate) fn eval_counts(&self, counts: &[f64]) -> f64 {
        self.weights.iter().zip(counts).map(|(w, c)| w * c).sum()
    }
}

/// The `2^level` dyadic interval indicators at one level of the bin grid.
pub fn dyadic_level_queries(bin_count: usize, level: u32) -> Result<Vec<LinearQuery>> {
    let parts = 1usize << level;
    if parts > bin_count {
        return Err(Error::InvalidParameter(format!(
            "dyadic level {level} has more intervals than the {bin_count} bins"
        )));
    }
    (0..parts)
        .map(|p| LinearQuery::interval(bin_count, p * bin_count / parts, (p + 1) * bin_count / parts))
        .collect()
}

/// All dyadic interval indicators from the whole domain down to `max_depth`.
pub fn interval_queries(bin_count: usize, max_depth: u32) -> Result<Vec<LinearQuery>> {
    let mut out = Vec::new();
    for level in 0..=max_depth {
        out.extend(dyadic_level_queries(bin_count, level)?);
    }
    Ok(out)
}
