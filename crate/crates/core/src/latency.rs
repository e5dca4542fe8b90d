//! Four-part delay model of a partially offloaded subtask and the
//! reduction-rate objective.
//!
//! Units: workloads in cycles, capacities in cycles/s, data in bits, rates
//! in bit/s, delays in seconds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobility::VehicleId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubtaskSpec {
    /// Total workload W (cycles).
    pub workload: f64,
    /// Input size I (bits).
    pub input_bits: f64,
    /// Offloaded workload fraction.
    pub lambda: f64,
    /// Output/input ratio of the local part; sizes the uplink.
    pub lo_ratio: f64,
    /// Output/input ratio of the server part; sizes the downlink.
    pub eo_ratio: f64,
}

impl SubtaskSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.workload.is_finite() && self.workload > 0.0) {
            return Err(Error::InvalidParameter(format!("workload must be positive, got {}", self.workload)));
        }
        if !(self.input_bits.is_finite() && self.input_bits > 0.0) {
            return Err(Error::InvalidParameter(format!("input size must be positive, got {}", self.input_bits)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda must be in [0, 1], got {}", self.lambda)));
        }
        if !(self.lo_ratio >= 0.0 && self.eo_ratio >= 0.0) {
            return Err(Error::InvalidParameter("output ratios must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub owner: VehicleId,
    /// Executed strictly in order.
    pub subtasks: Vec<SubtaskSpec>,
    pub arrival_step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DelayBreakdown {
    pub edge_exec_s: f64,
    pub local_exec_s: f64,
    pub uplink_s: f64,
    pub downlink_s: f64,
    pub total_s: f64,
}

/// `W * lambda / a`.
pub fn edge_exec_delay(sub: &SubtaskSpec, allocation: f64) -> Result<f64> {
    if sub.lambda == 0.0 {
        return Ok(0.0);
    }
    if !(allocation > 0.0) {
        return Err(Error::InvalidAllocation(format!(
            "offloaded work needs a positive allocation, got {allocation}"
        )));
    }
    Ok(sub.workload * sub.lambda / allocation)
}

/// `W * (1 - lambda) / C`.
pub fn local_exec_delay(sub: &SubtaskSpec, local_capacity: f64) -> Result<f64> {
    if !(local_capacity > 0.0) {
        return Err(Error::InvalidParameter(format!("local capacity must be positive, got {local_capacity}")));
    }
    Ok(sub.workload * (1.0 - sub.lambda) / local_capacity)
}

fn check_rate(sub: &SubtaskSpec, rate: f64) -> Result<bool> {
    if sub.lambda == 0.0 {
        return Ok(false);
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidRate(format!("offloading needs a positive link rate, got {rate}")));
    }
    Ok(true)
}

/// `I * LO / R`.
pub fn uplink_delay(sub: &SubtaskSpec, rate: f64) -> Result<f64> {
    Ok(if check_rate(sub, rate)? {
        sub.input_bits * sub.lo_ratio / rate
    } else {
        0.0
    })
}

/// `I * LO * EO / R`.
pub fn downlink_delay(sub: &SubtaskSpec, rate: f64) -> Result<f64> {
    Ok(if check_rate(sub, rate)? {
        sub.input_bits * sub.lo_ratio * sub.eo_ratio / rate
    } else {
        0.0
    })
}

/// Delay of one subtask. `allocation = None` means no offloading: the whole
/// workload runs locally and nothing is transferred.
pub fn total_task_delay(
    sub: &SubtaskSpec,
    allocation: Option<f64>,
    local_capacity: f64,
    uplink_rate: f64,
    downlink_rate: f64,
) -> Result<DelayBreakdown> {
    let d = match allocation {
        None => {
            let local = SubtaskSpec { lambda: 0.0, ..*sub };
            DelayBreakdown {
                local_exec_s: local_exec_delay(&local, local_capacity)?,
                ..Default::default()
            }
        }
        Some(a) => DelayBreakdown {
            edge_exec_s: edge_exec_delay(sub, a)?,
            local_exec_s: local_exec_delay(sub, local_capacity)?,
            uplink_s: uplink_delay(sub, uplink_rate)?,
            downlink_s: downlink_delay(sub, downlink_rate)?,
            total_s: 0.0,
        },
    };
    Ok(DelayBreakdown {
        total_s: d.edge_exec_s + d.local_exec_s + d.uplink_s + d.downlink_s,
        ..d
    })
}

/// Pure-local delay `W / C`, the reduction-rate reference.
pub fn local_reference_delay(workload: f64, local_capacity: f64) -> f64 {
    workload / local_capacity
}

/// `De * C / W`, evaluated as `De / (W / C)` so a pure-local delay gives exactly 1.
pub fn reduction_rate(delay_s: f64, sub: &SubtaskSpec, local_capacity: f64) -> Result<f64> {
    if !(local_capacity > 0.0) || !(sub.workload > 0.0) {
        return Err(Error::InvalidParameter("reduction rate needs positive workload and capacity".into()));
    }
    if !(delay_s >= 0.0) {
        return Err(Error::InvalidParameter(format!("delay must be non-negative, got {delay_s}")));
    }
    Ok(delay_s / local_reference_delay(sub.workload, local_capacity))
}

/// Arithmetic mean; `None` when there is nothing to average.
pub fn average_reduction_rate(rates: &[f64]) -> Option<f64> {
    if rates.is_empty() {
        None
    } else {
        Some(rates.iter().sum::<f64>() / rates.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(workload: f64, input_bits: f64, lambda: f64, lo: f64, eo: f64) -> SubtaskSpec {
        SubtaskSpec {
            workload,
            input_bits,
            lambda,
            lo_ratio: lo,
            eo_ratio: eo,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn edge_and_local_execution() {
        assert!(close(edge_exec_delay(&sub(1e9, 1.0, 0.5, 0.0, 0.0), 1e8).unwrap(), 5.0));
        assert!(close(edge_exec_delay(&sub(1e9, 1.0, 1.0, 0.0, 0.0), 2e8).unwrap(), 5.0));
        assert_eq!(edge_exec_delay(&sub(1e9, 1.0, 0.0, 0.0, 0.0), 0.0).unwrap(), 0.0);
        assert!(matches!(edge_exec_delay(&sub(1e9, 1.0, 0.5, 0.0, 0.0), 0.0), Err(Error::InvalidAllocation(_))));

        assert!(close(local_exec_delay(&sub(1e9, 1.0, 0.0, 0.0, 0.0), 1e8).unwrap(), 10.0));
        assert_eq!(local_exec_delay(&sub(1e9, 1.0, 1.0, 0.0, 0.0), 1e8).unwrap(), 0.0);
        assert!(close(local_exec_delay(&sub(1e9, 1.0, 0.5, 0.0, 0.0), 1e8).unwrap(), 5.0));
        assert!(local_exec_delay(&sub(1e9, 1.0, 0.5, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn transfers() {
        assert!(close(uplink_delay(&sub(1.0, 1e6, 0.5, 0.2, 0.0), 1e5).unwrap(), 2.0));
        assert_eq!(uplink_delay(&sub(1.0, 1e6, 0.5, 0.0, 0.0), 1e5).unwrap(), 0.0);
        assert!(close(uplink_delay(&sub(1.0, 2e6, 0.5, 0.5, 0.0), 1e6).unwrap(), 1.0));
        assert!(close(downlink_delay(&sub(1.0, 1e6, 0.5, 0.2, 0.5), 1e5).unwrap(), 1.0));
        assert_eq!(downlink_delay(&sub(1.0, 1e6, 0.5, 0.2, 0.0), 1e5).unwrap(), 0.0);
        assert!(close(downlink_delay(&sub(1.0, 1e6, 0.5, 1.0, 1.0), 1e6).unwrap(), 1.0));
        assert_eq!(uplink_delay(&sub(1.0, 1e6, 0.0, 0.2, 0.5), 0.0).unwrap(), 0.0);
        assert!(matches!(uplink_delay(&sub(1.0, 1e6, 0.5, 0.2, 0.5), 0.0), Err(Error::InvalidRate(_))));
        assert!(downlink_delay(&sub(1.0, 1e6, 0.5, 0.2, 0.5), -1.0).is_err());
    }

    #[test]
    fn breakdowns() {
        let s = sub(1e9, 1e6, 0.5, 0.2, 0.5);
        let none = total_task_delay(&s, None, 1e8, 1e6, 1e6).unwrap();
        assert_eq!(none.total_s, 10.0);
        assert_eq!(none.edge_exec_s + none.uplink_s + none.downlink_s, 0.0);

        let d = total_task_delay(&s, Some(2e8), 1e8, 1e6, 1e6).unwrap();
        assert!(close(d.edge_exec_s, 2.5));
        assert!(close(d.local_exec_s, 5.0));
        assert!(close(d.uplink_s, 0.2));
        assert!(close(d.downlink_s, 0.1));
        assert!(close(d.total_s, 7.8));

        // all offloaded, vanishing input: only edge time remains
        let tiny = sub(1e9, 1e-30, 1.0, 1.0, 1.0);
        let d = total_task_delay(&tiny, Some(2e8), 1e8, 1e6, 1e6).unwrap();
        assert!(close(d.total_s, 5.0));
    }

    #[test]
    fn reduction_rates() {
        let s = sub(1e9, 1.0, 0.3, 0.0, 0.0);
        assert_eq!(reduction_rate(1e9 / 1e8, &s, 1e8).unwrap(), 1.0);
        assert!(close(reduction_rate(5.0, &s, 1e8).unwrap(), 0.5));
        assert!(close(reduction_rate(15.0, &s, 1e8).unwrap(), 1.5));
        assert!(reduction_rate(1.0, &s, 0.0).is_err());
        assert!(reduction_rate(1.0, &sub(0.0, 1.0, 0.3, 0.0, 0.0), 1e8).is_err());
    }

    #[test]
    fn averages() {
        assert_eq!(average_reduction_rate(&[1.0, 0.5]), Some(0.75));
        assert_eq!(average_reduction_rate(&[0.37]), Some(0.37));
        assert_eq!(average_reduction_rate(&[]), None);
    }
}
