//! Context reporting under the configured privacy mode, and the decision
//! centre's table of the latest reports.
//!
//! Positions are reported as a public segment index plus a private offset in
//! `[0, position_segment_m)`. Speed is reported over `[0, speed_max_mps]`.

use rand::Rng;

use super::config::{PrivacyConfig, PrivacyMode};
use crate::dp::{interval_queries, k_rr, mwem, perturb_context, Histogram, PerturbedContext, PrivacyBudget};
use crate::error::Result;
use crate::rng::stream;

#[derive(Debug, Clone)]
enum Mode {
    Exact,
    /// k-RR over the histogram bins, then a uniform value in the reported bin.
    RandomizedResponse { budget: PrivacyBudget },
    /// Bin-preserving perturbation against MWEM-released histograms.
    Released,
}

/// Turns true vehicle context into what the decision centre sees.
#[derive(Debug, Clone)]
pub struct ContextReporter {
    mode: Mode,
    segment: f64,
    position: Histogram,
    speed: Histogram,
}

impl ContextReporter {
    /// `initial` lists every vehicle's true `(x, speed)` at step 0; the LDP
    /// mode releases one MWEM histogram per attribute from it with half the
    /// budget each.
    pub fn new(cfg: &PrivacyConfig, initial: &[(f64, f64)], seed: u64) -> Result<Self> {
        let segment = cfg.position_segment_m;
        let offsets = initial.iter().map(|&(x, _)| x.rem_euclid(segment));
        let mut position = Histogram::from_values(0.0, segment, cfg.position_bins as usize, offsets)?;
        let speeds = initial.iter().map(|&(_, v)| v);
        let mut speed = Histogram::from_values(0.0, cfg.speed_max_mps, cfg.speed_bins as usize, speeds)?;
        let half = PrivacyBudget::new(cfg.epsilon)?.split(2);

        let mode = match cfg.mode {
            PrivacyMode::None => Mode::Exact,
            PrivacyMode::Rr => Mode::RandomizedResponse { budget: half },
            PrivacyMode::Ldp => {
                if !initial.is_empty() {
                    let mut rng = stream(seed, "mwem", &[0]);
                    let q = interval_queries(position.bin_count(), cfg.mwem_query_depth)?;
                    position = mwem(&position, &q, cfg.mwem_iterations, half, &mut rng)?;
                    let mut rng = stream(seed, "mwem", &[1]);
                    let q = interval_queries(speed.bin_count(), cfg.mwem_query_depth)?;
                    speed = mwem(&speed, &q, cfg.mwem_iterations, half, &mut rng)?;
                }
                Mode::Released
            }
        };
        Ok(Self {
            mode,
            segment,
            position,
            speed,
        })
    }

    pub fn released_position(&self) -> &Histogram {
        &self.position
    }

    pub fn released_speed(&self) -> &Histogram {
        &self.speed
    }

    fn perturb<R: Rng + ?Sized>(&self, value: f64, hist: &Histogram, rng: &mut R) -> Result<f64> {
        match &self.mode {
            Mode::Exact => Ok(value),
            Mode::Released => perturb_context(value, hist, rng),
            Mode::RandomizedResponse { budget } => {
                let bin = k_rr(hist.bin_of(value), hist.bin_count(), *budget, rng)?;
                let (lo, hi) = hist.bin_range(bin);
                Ok(rng.gen_range(lo..hi))
            }
        }
    }

    /// Report for a vehicle at wrapped road coordinate `x` moving at `speed`.
    pub fn report<R: Rng + ?Sized>(&self, x: f64, speed: f64, rng: &mut R) -> Result<PerturbedContext> {
        let seg = (x / self.segment).floor();
        let offset = x - seg * self.segment;
        let offset = self.perturb(offset, &self.position, rng)?;
        let reported_speed = self.perturb(speed, &self.speed, rng)?;
        Ok(PerturbedContext {
            reported_position: seg * self.segment + offset,
            reported_speed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Report {
    x: f64,
    speed: f64,
    step: u64,
}

/// Latest report per vehicle. Positions between reports are extrapolated
/// with the reported speed, wrapped on a loop road.
#[derive(Debug, Clone)]
pub struct ContextTable {
    reports: Vec<Option<Report>>,
    dt: f64,
    wrap: Option<f64>,
}

impl ContextTable {
    pub fn new(vehicles: usize, dt: f64, wrap: Option<f64>) -> Self {
        Self {
            reports: vec![None; vehicles],
            dt,
            wrap,
        }
    }

    pub fn record(&mut self, vehicle: usize, ctx: PerturbedContext, step: u64) {
        self.reports[vehicle] = Some(Report {
            x: ctx.reported_position,
            speed: ctx.reported_speed,
            step,
        });
    }

    /// Estimated road x-coordinate at `step`, `None` before the first report.
    pub fn estimate_x(&self, vehicle: usize, step: u64) -> Option<f64> {
        let r = self.reports.get(vehicle).copied().flatten()?;
        let x = r.x + r.speed * step.saturating_sub(r.step) as f64 * self.dt;
        Some(match self.wrap {
            Some(len) => x.rem_euclid(len),
            None => x,
        })
    }
}
