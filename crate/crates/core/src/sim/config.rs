//! Scenario configuration. Every key has a default; `validate` reports the
//! first violated constraint by its dotted key.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobility::ChannelParams;

/// Closed interval `[min, max]`, written as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range<T>(pub T, pub T);

impl<T: Copy + PartialOrd + fmt::Display> Range<T> {
    pub fn min(&self) -> T {
        self.0
    }

    pub fn max(&self) -> T {
        self.1
    }

    fn check(&self, key: &str) -> Result<()> {
        if self.0 > self.1 {
            return Err(Error::range(key, format!("must satisfy min <= max, got [{}, {}]", self.0, self.1)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyMode {
    None,
    Rr,
    Ldp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rm,
    Cm,
    Bm,
    Bnb,
    /// Never offload; the throughput baseline.
    Local,
}

macro_rules! str_enum {
    ($ty:ty, $what:literal, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err(Error::Usage(format!(
                        "unknown {} `{other}` (expected one of: {})",
                        $what,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

str_enum!(PrivacyMode, "privacy mode", None => "none", Rr => "rr", Ldp => "ldp");
str_enum!(Algorithm, "algorithm", Bnb => "bnb", Rm => "rm", Cm => "cm", Bm => "bm", Local => "local");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoadConfig {
    pub road_length_m: f64,
    pub lanes: u32,
    pub lane_width_m: f64,
    pub vehicle_count: u32,
    pub dt_s: f64,
    pub horizon_steps: u64,
    /// Vehicles leaving the far end re-enter at x = 0.
    pub wrap_road: bool,
    /// Cap on steps spent finishing in-flight tasks after the horizon.
    pub max_drain_steps: u64,
}

impl Default for RoadConfig {
    fn default() -> Self {
        Self {
            road_length_m: 2000.0,
            lanes: 4,
            lane_width_m: 3.0,
            vehicle_count: 40,
            dt_s: 1.0,
            horizon_steps: 200,
            wrap_road: true,
            max_drain_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    pub speed_mps: Range<f64>,
    /// cycles/s
    pub capacity: Range<f64>,
    pub transmit_power_w: f64,
    /// Probability that a vehicle also hosts an edge server.
    pub server_fraction: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            speed_mps: Range(10.0, 30.0),
            capacity: Range(5e8, 1e9),
            transmit_power_w: 0.1,
            server_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RsuConfig {
    pub spacing_m: f64,
    /// Lateral distance beyond the far road edge.
    pub offset_m: f64,
    pub height_m: f64,
    pub capacity: Range<f64>,
    pub transmit_power_w: f64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        Self {
            spacing_m: 500.0,
            offset_m: 20.0,
            height_m: 10.0,
            capacity: Range(4e9, 8e9),
            transmit_power_w: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskConfig {
    pub subtasks: Range<u32>,
    /// cycles per subtask
    pub workload: Range<f64>,
    /// bits per subtask
    pub input_bits: Range<f64>,
    pub lambda: Range<f64>,
    pub lo_ratio: Range<f64>,
    pub eo_ratio: Range<f64>,
    /// Idle steps between finishing one task and issuing the next.
    pub think_steps: Range<u64>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            subtasks: Range(3, 8),
            workload: Range(5e8, 2e9),
            input_bits: Range(1e7, 4e7),
            lambda: Range(0.4, 0.9),
            lo_ratio: Range(0.5, 1.0),
            eo_ratio: Range(0.1, 0.5),
            think_steps: Range(0, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrivacyConfig {
    pub mode: PrivacyMode,
    pub epsilon: f64,
    pub speed_max_mps: f64,
    pub speed_bins: u32,
    /// Positions are reported as (segment index, perturbed offset in segment).
    pub position_segment_m: f64,
    pub position_bins: u32,
    pub mwem_iterations: u32,
    /// Dyadic interval queries from the whole domain down to this depth.
    pub mwem_query_depth: u32,
}

impl Default for PrivacyConfig {
    fn default() -> Self {
        Self {
            mode: PrivacyMode::Ldp,
            epsilon: 5.0,
            speed_max_mps: 100.0,
            speed_bins: 10,
            position_segment_m: 1000.0,
            position_bins: 10,
            mwem_iterations: 5,
            mwem_query_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    /// Candidate set size.
    pub m: u32,
    /// Allocation quantum = server capacity / quantum_divisor.
    pub quantum_divisor: u32,
    pub radius_m: f64,
    pub prune: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Bnb,
            m: 5,
            quantum_divisor: 4,
            radius_m: 500.0,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    /// 0 keeps the average reduction rate cumulative; otherwise it covers
    /// tasks completed within the last `window_steps` steps.
    pub window_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub scenario: RoadConfig,
    pub vehicle: VehicleConfig,
    pub rsu: RsuConfig,
    pub task: TaskConfig,
    pub channel: ChannelParams,
    pub privacy: PrivacyConfig,
    pub optimizer: OptimizerConfig,
    pub metrics: MetricsConfig,
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::range(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::range(key, format!("must be non-negative, got {v}")))
    }
}

fn at_least(key: &str, v: u64, min: u64) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::range(key, format!("must be at least {min}, got {v}")))
    }
}

fn positive_range(key: &str, r: Range<f64>) -> Result<()> {
    r.check(key)?;
    positive(key, r.min())
}

fn unit_range(key: &str, r: Range<f64>) -> Result<()> {
    r.check(key)?;
    if r.min() < 0.0 || r.max() > 1.0 {
        return Err(Error::range(key, format!("must lie within [0, 1], got [{}, {}]", r.min(), r.max())));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        positive("scenario.road_length_m", s.road_length_m)?;
        at_least("scenario.lanes", s.lanes.into(), 1)?;
        positive("scenario.lane_width_m", s.lane_width_m)?;
        positive("scenario.dt_s", s.dt_s)?;
        at_least("scenario.horizon_steps", s.horizon_steps, 1)?;

        let v = &self.vehicle;
        v.speed_mps.check("vehicle.speed_mps")?;
        non_negative("vehicle.speed_mps", v.speed_mps.min())?;
        positive_range("vehicle.capacity", v.capacity)?;
        positive("vehicle.transmit_power_w", v.transmit_power_w)?;
        if !(0.0..=1.0).contains(&v.server_fraction) {
            return Err(Error::range("vehicle.server_fraction", format!("must lie within [0, 1], got {}", v.server_fraction)));
        }

        let r = &self.rsu;
        positive("rsu.spacing_m", r.spacing_m)?;
        non_negative("rsu.offset_m", r.offset_m)?;
        non_negative("rsu.height_m", r.height_m)?;
        positive_range("rsu.capacity", r.capacity)?;
        positive("rsu.transmit_power_w", r.transmit_power_w)?;

        let t = &self.task;
        t.subtasks.check("task.subtasks")?;
        at_least("task.subtasks", t.subtasks.min().into(), 1)?;
        positive_range("task.workload", t.workload)?;
        positive_range("task.input_bits", t.input_bits)?;
        unit_range("task.lambda", t.lambda)?;
        t.lo_ratio.check("task.lo_ratio")?;
        non_negative("task.lo_ratio", t.lo_ratio.min())?;
        t.eo_ratio.check("task.eo_ratio")?;
        non_negative("task.eo_ratio", t.eo_ratio.min())?;
        t.think_steps.check("task.think_steps")?;

        let c = &self.channel;
        positive("channel.bandwidth_hz", c.bandwidth_hz)?;
        positive("channel.ref_gain", c.ref_gain)?;
        positive("channel.path_loss_exp", c.path_loss_exp)?;
        positive("channel.noise_power_w", c.noise_power_w)?;

        let p = &self.privacy;
        positive("privacy.epsilon", p.epsilon)?;
        positive("privacy.speed_max_mps", p.speed_max_mps)?;
        at_least("privacy.speed_bins", p.speed_bins.into(), 2)?;
        positive("privacy.position_segment_m", p.position_segment_m)?;
        at_least("privacy.position_bins", p.position_bins.into(), 2)?;
        at_least("privacy.mwem_iterations", p.mwem_iterations.into(), 1)?;
        if (1u64 << p.mwem_query_depth.min(63)) > u64::from(p.speed_bins.min(p.position_bins)) {
            return Err(Error::range(
                "privacy.mwem_query_depth",
                "must not split the domain into more intervals than there are bins",
            ));
        }

        let o = &self.optimizer;
        at_least("optimizer.m", o.m.into(), 1)?;
        at_least("optimizer.quantum_divisor", o.quantum_divisor.into(), 1)?;
        positive("optimizer.radius_m", o.radius_m)?;
        Ok(())
    }
}
