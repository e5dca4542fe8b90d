//! Independent reference computations shared by the integration tests.
//! Nothing here calls the library's own evaluation code.

#![allow(dead_code)]

use privoffload::mobility::ServerId;
use privoffload::optimizer::{Candidate, Problem};

/// Reduction rate of one candidate, written out from the delay model:
/// `(W l / a + W (1 - l) / C + I LO / Ru + I LO EO / Rd) / (W / C)`.
pub fn rate(c: &Candidate, choice: Option<(ServerId, f64)>) -> f64 {
    let s = &c.subtask;
    let reference = s.workload / c.local_capacity;
    match choice {
        None => 1.0,
        Some((server, a)) => {
            let l = c.links.iter().find(|l| l.server == server).expect("reachable server");
            let edge = if s.lambda == 0.0 { 0.0 } else { s.workload * s.lambda / a };
            let local = s.workload * (1.0 - s.lambda) / c.local_capacity;
            let (up, down) = if s.lambda == 0.0 {
                (0.0, 0.0)
            } else {
                (s.input_bits * s.lo_ratio / l.uplink_bps, s.input_bits * s.lo_ratio * s.eo_ratio / l.downlink_bps)
            };
            (edge + local + up + down) / reference
        }
    }
}

pub type Plan = Vec<Option<(ServerId, f64)>>;

/// Every feasible plan with allocations in whole multiples of `quantum`.
pub fn all_plans(problem: &Problem, quantum: f64) -> Vec<Plan> {
    fn go(p: &Problem, q: f64, i: usize, left: &mut Vec<f64>, cur: &mut Plan, out: &mut Vec<Plan>) {
        if i == p.candidates.len() {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        go(p, q, i + 1, left, cur, out);
        cur.pop();
        for l in &p.candidates[i].links {
            let s = p.servers.iter().position(|s| s.id == l.server).unwrap();
            let mut k = 1.0;
            while k * q <= left[s] * (1.0 + 1e-12) {
                left[s] -= k * q;
                cur.push(Some((l.server, k * q)));
                go(p, q, i + 1, left, cur, out);
                cur.pop();
                left[s] += k * q;
                k += 1.0;
            }
        }
    }
    let mut left: Vec<f64> = problem.servers.iter().map(|s| s.capacity - s.committed).collect();
    let mut out = Vec::new();
    go(problem, quantum, 0, &mut left, &mut Vec::new(), &mut out);
    out
}

pub fn objective(problem: &Problem, plan: &Plan) -> f64 {
    let total: f64 = problem.candidates.iter().zip(plan).map(|(c, &ch)| rate(c, ch)).sum();
    total / plan.len() as f64
}

/// Minimum objective over all feasible plans.
pub fn brute_force(problem: &Problem, quantum: f64) -> f64 {
    all_plans(problem, quantum)
        .iter()
        .map(|p| objective(problem, p))
        .fold(f64::INFINITY, f64::min)
}

/// k-RR keeps the true bin with `e^eps / (e^eps + k - 1)`.
pub fn krr_keep(k: usize, eps: f64) -> f64 {
    let e = eps.exp();
    e / (e + k as f64 - 1.0)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
