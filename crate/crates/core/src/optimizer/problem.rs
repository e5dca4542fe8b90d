use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latency::{reduction_rate, total_task_delay, SubtaskSpec, TaskId};
use crate::mobility::{EdgeServer, ServerId, VehicleId};

/// Relative slack when comparing summed allocations against capacity.
/// Relative slack on capacity comparisons.
pub const CAPACITY_TOL: f64 = 1e-9;

/// A reachable server as estimated by the decision center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub server: ServerId,
    pub distance_m: f64,
    pub uplink_bps: f64,
    pub downlink_bps: f64,
}

/// One task whose ready subtask awaits a decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub task_id: TaskId,
    pub vehicle: VehicleId,
    pub subtask: SubtaskSpec,
    pub local_capacity: f64,
    /// Reachable servers, in ascending server id.
    pub links: Vec<Link>,
}

impl Candidate {
    pub fn link(&self, server: ServerId) -> Option<&Link> {
        self.links.iter().find(|l| l.server == server)
    }

    /// Reduction rate of running locally (exactly 1 by construction).
    pub fn local_rate(&self) -> Result<f64> {
        let d = total_task_delay(&self.subtask, None, self.local_capacity, 0.0, 0.0)?;
        reduction_rate(d.total_s, &self.subtask, self.local_capacity)
    }

    pub fn offload_rate(&self, link: &Link, allocation: f64) -> Result<f64> {
        let d = total_task_delay(&self.subtask, Some(allocation), self.local_capacity, link.uplink_bps, link.downlink_bps)?;
        reduction_rate(d.total_s, &self.subtask, self.local_capacity)
    }

    /// Same as `offload_rate` with transfer time ignored.
    pub(crate) fn compute_only_rate(&self, allocation: f64) -> Result<f64> {
        let d = total_task_delay(&self.subtask, Some(allocation), self.local_capacity, f64::INFINITY, f64::INFINITY)?;
        reduction_rate(d.total_s, &self.subtask, self.local_capacity)
    }
}

/// A joint decision instance: candidates plus the server snapshot they compete for.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub candidates: Vec<Candidate>,
    pub servers: Vec<EdgeServer>,
    pub step: u64,
}

impl Problem {
    pub fn server_index(&self, id: ServerId) -> Option<usize> {
        self.servers.iter().position(|s| s.id == id)
    }

    pub fn remaining(&self) -> Vec<f64> {
        self.servers.iter().map(EdgeServer::remaining).collect()
    }
}

/// Discrete allocation step `C`; a task receives `C, 2C, ...` up to what remains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Quantum {
    /// Same step on every server (cycles/s).
    Fixed(f64),
    /// Server capacity divided by this number.
    Divisor(u32),
}

impl Quantum {
    pub fn validate(self) -> Result<()> {
        match self {
            Quantum::Fixed(q) if !(q.is_finite() && q > 0.0) => {
                Err(Error::InvalidParameter(format!("resource quantum must be positive, got {q}")))
            }
            Quantum::Divisor(0) => Err(Error::InvalidParameter("quantum divisor must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn for_server(self, server: &EdgeServer) -> f64 {
        match self {
            Quantum::Fixed(q) => q,
            Quantum::Divisor(d) => server.capacity / f64::from(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllocationPolicy {
    /// Multiples of a quantum.
    Quantized(Quantum),
    /// Everything the server has left.
    FullRemaining,
}

/// Allocation options on `server` given `remaining` capacity, ascending.
pub fn allocation_levels(policy: AllocationPolicy, server: &EdgeServer, remaining: f64) -> Vec<f64> {
    match policy {
        AllocationPolicy::Quantized(q) => {
            let step = q.for_server(server);
            let k = (remaining / step + CAPACITY_TOL).floor().max(0.0) as u64;
            (1..=k).map(|i| i as f64 * step).collect()
        }
        AllocationPolicy::FullRemaining => {
            if remaining > server.capacity * CAPACITY_TOL {
                vec![remaining]
            } else {
                Vec::new()
            }
        }
    }
}

/// Server and allocation for one candidate; `server = None` runs locally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub server: Option<ServerId>,
    pub allocation: f64,
}

impl Assignment {
    pub const LOCAL: Assignment = Assignment {
        server: None,
        allocation: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffloadDecision {
    pub task_id: TaskId,
    pub server: Option<ServerId>,
    /// cycles/s, zero when not offloaded
    pub allocation: f64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    /// One per candidate, in candidate order.
    pub decisions: Vec<OffloadDecision>,
    /// Average reduction rate over the candidates.
    pub objective: f64,
}

/// Per-candidate reduction rates of `assignments`, validated against the links.
pub fn evaluate(problem: &Problem, assignments: &[Assignment]) -> Result<Vec<f64>> {
    if assignments.len() != problem.candidates.len() {
        return Err(Error::InvalidParameter(format!(
            "{} assignments for {} candidates",
            assignments.len(),
            problem.candidates.len()
        )));
    }
    problem
        .candidates
        .iter()
        .zip(assignments)
        .map(|(c, a)| match a.server {
            None => c.local_rate(),
            Some(s) => {
                let link = c
                    .link(s)
                    .ok_or_else(|| Error::InvalidParameter(format!("server {} unreachable for task {}", s.0, c.task_id.0)))?;
                c.offload_rate(link, a.allocation)
            }
        })
        .collect()
}

pub(crate) fn objective_of(rates: &[f64]) -> f64 {
    let mut sum = 0.0;
    for r in rates {
        sum += r;
    }
    sum / rates.len() as f64
}

pub(crate) fn decision_set(problem: &Problem, assignments: &[Assignment]) -> Result<DecisionSet> {
    let rates = evaluate(problem, assignments)?;
    Ok(DecisionSet {
        decisions: problem
            .candidates
            .iter()
            .zip(assignments)
            .map(|(c, a)| OffloadDecision {
                task_id: c.task_id,
                server: a.server,
                allocation: if a.server.is_some() { a.allocation } else { 0.0 },
                step: problem.step,
            })
            .collect(),
        objective: objective_of(&rates),
    })
}

/// Capacity (per server, summed allocations within what remains) and
/// single-server (per task, one decision) constraints.
pub fn feasible(ds: &DecisionSet, servers: &[EdgeServer]) -> bool {
    let mut seen = HashSet::new();
    let mut load: BTreeMap<ServerId, f64> = BTreeMap::new();
    for d in &ds.decisions {
        if !seen.insert(d.task_id) {
            return false;
        }
        match d.server {
            None if d.allocation != 0.0 => return false,
            None => {}
            Some(s) => {
                if !(d.allocation > 0.0 && d.allocation.is_finite()) {
                    return false;
                }
                *load.entry(s).or_default() += d.allocation;
            }
        }
    }
    load.into_iter().all(|(id, total)| match servers.iter().find(|s| s.id == id) {
        Some(s) => total <= s.remaining() + s.capacity * CAPACITY_TOL,
        None => false,
    })
}

/// The new task plus up to `m - 1` active tasks sharing a reachable server
/// with it, closest shared-server distance first. Returned in task-id order.
pub fn candidate_set(new_task: &Candidate, active: &[Candidate], m: usize) -> Result<Vec<Candidate>> {
    if m == 0 {
        return Err(Error::InvalidParameter("candidate set size m must be at least 1".into()));
    }
    let reach: HashSet<ServerId> = new_task.links.iter().map(|l| l.server).collect();
    let mut sharing: Vec<(f64, &Candidate)> = active
        .iter()
        .filter(|c| c.task_id != new_task.task_id)
        .filter_map(|c| {
            c.links
                .iter()
                .filter(|l| reach.contains(&l.server))
                .map(|l| l.distance_m)
                .min_by(f64::total_cmp)
                .map(|d| (d, c))
        })
        .collect();
    sharing.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.task_id.cmp(&b.1.task_id)));
    let mut out: Vec<Candidate> = std::iter::once(new_task.clone())
        .chain(sharing.into_iter().take(m - 1).map(|(_, c)| c.clone()))
        .collect();
    out.sort_by_key(|c| c.task_id);
    Ok(out)
}
