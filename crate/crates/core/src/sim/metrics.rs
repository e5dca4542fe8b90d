//! Per-step metrics: running average reduction rate and completed-task
//! throughput relative to the all-local baseline.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// One engine's view of a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub avg_reduction_rate: Option<f64>,
    pub completed_tasks: u64,
}

/// Output of a single engine run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub time_s: f64,
    pub avg_reduction_rate: Option<f64>,
    pub completed_tasks: u64,
    pub completed_tasks_local_baseline: u64,
    pub task_multiplier: Option<f64>,
}

/// A run merged with its all-local shadow. The shorter of the two is padded
/// with its final state so both cover the same steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub records: Vec<StepRecord>,
}

impl MetricsSeries {
    pub fn merge(main: &RunTrace, shadow: &RunTrace, dt_s: f64) -> Self {
        let len = main.records.len().max(shadow.records.len());
        let at = |t: &RunTrace, i: usize| -> Option<TraceRecord> { t.records.get(i).or(t.records.last()).copied() };
        let records = (0..len)
            .map(|i| {
                let m = at(main, i);
                let s = at(shadow, i);
                let completed = m.map_or(0, |r| r.completed_tasks);
                let baseline = s.map_or(0, |r| r.completed_tasks);
                StepRecord {
                    step: i as u64,
                    time_s: i as f64 * dt_s,
                    avg_reduction_rate: m.and_then(|r| r.avg_reduction_rate),
                    completed_tasks: completed,
                    completed_tasks_local_baseline: baseline,
                    task_multiplier: multiplier(completed, baseline),
                }
            })
            .collect();
        Self { records }
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    /// Average reduction rate at the end of the run.
    pub fn final_reduction_rate(&self) -> Option<f64> {
        self.last().and_then(|r| r.avg_reduction_rate)
    }
}

/// `with / without`, or `None` when the baseline completed nothing.
pub fn multiplier(with: u64, without: u64) -> Option<f64> {
    (without > 0).then(|| with as f64 / without as f64)
}

/// Completed tasks relative to the all-local baseline at the end of the run.
pub fn task_multiplier(series: &MetricsSeries) -> Option<f64> {
    let last = series.last()?;
    multiplier(last.completed_tasks, last.completed_tasks_local_baseline)
}

/// Reduction rates of completed tasks, averaged cumulatively or over a
/// trailing window of steps.
#[derive(Debug, Clone, Default)]
pub(crate) struct RateAccumulator {
    window: u64,
    sum: f64,
    count: u64,
    recent: VecDeque<(u64, f64)>,
}

impl RateAccumulator {
    pub(crate) fn new(window_steps: u64) -> Self {
        Self {
            window: window_steps,
            ..Self::default()
        }
    }

    pub(crate) fn push(&mut self, step: u64, rate: f64) {
        if self.window == 0 {
            self.sum += rate;
            self.count += 1;
        } else {
            self.recent.push_back((step, rate));
        }
    }

    pub(crate) fn average(&mut self, step: u64) -> Option<f64> {
        if self.window == 0 {
            return (self.count > 0).then(|| self.sum / self.count as f64);
        }
        while self.recent.front().is_some_and(|&(s, _)| s + self.window <= step) {
            self.recent.pop_front();
        }
        if self.recent.is_empty() {
            return None;
        }
        Some(self.recent.iter().map(|&(_, r)| r).sum::<f64>() / self.recent.len() as f64)
    }
}
