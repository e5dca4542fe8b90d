//! Plain enumeration of the discrete decision space, and a generator of
//! small random instances. Used by the `oracle` command to cross-check the
//! branch-and-bound search.

use rand::Rng;

use super::problem::{allocation_levels, evaluate, objective_of, AllocationPolicy, Assignment, Candidate, Link, Problem};
use crate::error::{Error, Result};
use crate::latency::{SubtaskSpec, TaskId};
use crate::mobility::{EdgeServer, Host, RsuId, ServerId, VehicleId};

/// Every feasible complete assignment, in lexicographic option order.
pub fn enumerate(problem: &Problem, policy: AllocationPolicy) -> Result<Vec<Vec<Assignment>>> {
    let mut out = Vec::new();
    let mut remaining = problem.remaining();
    let mut current = Vec::new();
    walk(problem, policy, &mut remaining, &mut current, &mut out)?;
    Ok(out)
}

fn walk(
    problem: &Problem,
    policy: AllocationPolicy,
    remaining: &mut Vec<f64>,
    current: &mut Vec<Assignment>,
    out: &mut Vec<Vec<Assignment>>,
) -> Result<()> {
    let depth = current.len();
    if depth == problem.candidates.len() {
        out.push(current.clone());
        return Ok(());
    }
    current.push(Assignment::LOCAL);
    walk(problem, policy, remaining, current, out)?;
    current.pop();
    let mut links: Vec<&Link> = problem.candidates[depth].links.iter().collect();
    links.sort_by_key(|l| l.server);
    for l in links {
        let s = problem
            .server_index(l.server)
            .ok_or_else(|| Error::NotFound(format!("edge server {}", l.server.0)))?;
        for a in allocation_levels(policy, &problem.servers[s], remaining[s]) {
            let saved = remaining[s];
            remaining[s] = (saved - a).max(0.0);
            current.push(Assignment {
                server: Some(l.server),
                allocation: a,
            });
            walk(problem, policy, remaining, current, out)?;
            current.pop();
            remaining[s] = saved;
        }
    }
    Ok(())
}

/// Best objective and the first assignment (in enumeration order) achieving it.
pub fn optimum(problem: &Problem, policy: AllocationPolicy) -> Result<(f64, Vec<Assignment>)> {
    let mut best: Option<(f64, Vec<Assignment>)> = None;
    for a in enumerate(problem, policy)? {
        let obj = objective_of(&evaluate(problem, &a)?);
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            best = Some((obj, a));
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty decision space".into()))
}

/// Random instance with up to `max_tasks` candidates, `max_servers` servers
/// and capacities of up to `max_quanta` quanta of `quantum` each.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_tasks: usize,
    max_servers: usize,
    max_quanta: u32,
    quantum: f64,
) -> Problem {
    let n_servers = rng.gen_range(1..=max_servers);
    let servers: Vec<EdgeServer> = (0..n_servers as u32)
        .map(|i| {
            let quanta = rng.gen_range(1..=max_quanta);
            let mut s = EdgeServer::new(ServerId(i), Host::Rsu(RsuId(i)), f64::from(quanta) * quantum);
            s.committed = f64::from(rng.gen_range(0..quanta)) * quantum * f64::from(rng.gen_bool(0.3) as u8);
            s
        })
        .collect();
    let n_tasks = rng.gen_range(1..=max_tasks);
    let candidates = (0..n_tasks as u64)
        .map(|t| {
            let mut links = Vec::new();
            for s in &servers {
                if rng.gen_bool(0.8) {
                    links.push(Link {
                        server: s.id,
                        distance_m: rng.gen_range(5.0..600.0),
                        uplink_bps: rng.gen_range(1e6..1e8),
                        downlink_bps: rng.gen_range(1e6..1e8),
                    });
                }
            }
            Candidate {
                task_id: TaskId(t),
                vehicle: VehicleId(t as u32),
                subtask: SubtaskSpec {
                    workload: rng.gen_range(1e8..3e9),
                    input_bits: rng.gen_range(1e5..2e7),
                    lambda: rng.gen_range(0.0..=1.0),
                    lo_ratio: rng.gen_range(0.0..1.5),
                    eo_ratio: rng.gen_range(0.0..1.0),
                },
                local_capacity: rng.gen_range(2e8..1.5e9),
                links,
            }
        })
        .collect();
    Problem {
        candidates,
        servers,
        step: 0,
    }
}
