//! Reference decision rules. RM and CM serve tasks one at a time in task-id
//! order and hand each one everything its chosen server has left; BM searches
//! server choice jointly but also allocates full remaining capacity.

use rand::Rng;

use super::bnb::{search, BnbOptions};
use super::problem::{decision_set, AllocationPolicy, Assignment, DecisionSet, Link, Problem, CAPACITY_TOL};
use crate::error::{Error, Result};

fn greedy<F>(problem: &Problem, mut pick: F) -> Result<DecisionSet>
where
    F: FnMut(&[&Link]) -> Option<usize>,
{
    let mut remaining = problem.remaining();
    let mut assignments = vec![Assignment::LOCAL; problem.candidates.len()];
    let mut order: Vec<usize> = (0..problem.candidates.len()).collect();
    order.sort_by_key(|&i| problem.candidates[i].task_id);
    for i in order {
        let c = &problem.candidates[i];
        let mut open: Vec<(&Link, usize)> = Vec::new();
        for l in &c.links {
            let s = problem
                .server_index(l.server)
                .ok_or_else(|| Error::NotFound(format!("edge server {}", l.server.0)))?;
            if remaining[s] > problem.servers[s].capacity * CAPACITY_TOL {
                open.push((l, s));
            }
        }
        let links: Vec<&Link> = open.iter().map(|(l, _)| *l).collect();
        if let Some(k) = pick(&links) {
            let (l, s) = open[k];
            assignments[i] = Assignment {
                server: Some(l.server),
                allocation: remaining[s],
            };
            remaining[s] = 0.0;
        }
    }
    decision_set(problem, &assignments)
}

/// Uniformly random reachable server with capacity left, all of it allocated.
pub fn rm_baseline<R: Rng + ?Sized>(problem: &Problem, rng: &mut R) -> Result<DecisionSet> {
    greedy(problem, |links| (!links.is_empty()).then(|| rng.gen_range(0..links.len())))
}

/// Nearest reachable server with capacity left (lower id on ties), all of it allocated.
pub fn cm_baseline(problem: &Problem) -> Result<DecisionSet> {
    greedy(problem, |links| {
        links
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.distance_m.total_cmp(&b.distance_m).then(a.server.cmp(&b.server)))
            .map(|(k, _)| k)
    })
}

/// Branch-and-bound over server choice with the allocation fixed to the
/// chosen server's full remaining capacity.
pub fn bm_baseline(problem: &Problem) -> Result<DecisionSet> {
    Ok(search(
        problem,
        BnbOptions {
            policy: AllocationPolicy::FullRemaining,
            prune: true,
        },
    )?
    .decisions)
}
