//! Depth-first branch-and-bound over (server, allocation) per candidate.
//!
//! Candidates are assigned in order. Each level branches on running locally
//! or on every reachable server with every allocation level the policy
//! permits from what is left. A child is pruned when its optimistic
//! completion is already worse than the incumbent.
//!
//! The optimistic completion of an unassigned candidate is the better of
//! running locally (reduction rate 1) and the largest allocation still
//! available on its best server with transfer time ignored. Both terms are
//! lower bounds on every option that candidate can still take, so the bound
//! is admissible and pruning never discards the optimum.
//!
//! Exact ties are broken toward local execution, then the lowest server id,
//! then the smallest allocation, compared candidate by candidate.

use std::cmp::Ordering;

use super::problem::{allocation_levels, decision_set, AllocationPolicy, Assignment, DecisionSet, Problem, Quantum, CAPACITY_TOL};
use crate::error::{Error, Result};
use crate::mobility::EdgeServer;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbOptions {
    pub policy: AllocationPolicy,
    pub prune: bool,
}

impl BnbOptions {
    pub fn quantized(quantum: Quantum) -> Self {
        Self {
            policy: AllocationPolicy::Quantized(quantum),
            prune: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned: u64,
    pub leaves: u64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub decisions: DecisionSet,
    pub assignments: Vec<Assignment>,
    pub stats: SearchStats,
}

/// A partial assignment of the first `prefix.len()` candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub prefix: Vec<Assignment>,
    /// Sum of the assigned candidates' reduction rates.
    pub partial_sum: f64,
}

impl SearchNode {
    pub fn root() -> Self {
        Self {
            prefix: Vec::new(),
            partial_sum: 0.0,
        }
    }

    /// Builds the node for `prefix`, checking reachability and capacity.
    pub fn new(problem: &Problem, prefix: Vec<Assignment>) -> Result<Self> {
        if prefix.len() > problem.candidates.len() {
            return Err(Error::InvalidParameter("prefix longer than the candidate list".into()));
        }
        remaining_after(problem, &prefix)?;
        let mut partial_sum = 0.0;
        for (c, a) in problem.candidates.iter().zip(&prefix) {
            partial_sum += match a.server {
                None => c.local_rate()?,
                Some(s) => {
                    let link = c
                        .link(s)
                        .ok_or_else(|| Error::InvalidParameter(format!("server {} unreachable for task {}", s.0, c.task_id.0)))?;
                    c.offload_rate(link, a.allocation)?
                }
            };
        }
        Ok(Self { prefix, partial_sum })
    }
}

fn remaining_after(problem: &Problem, prefix: &[Assignment]) -> Result<Vec<f64>> {
    let mut remaining = problem.remaining();
    for a in prefix {
        if let Some(s) = a.server {
            let idx = problem
                .server_index(s)
                .ok_or_else(|| Error::NotFound(format!("edge server {}", s.0)))?;
            remaining[idx] -= a.allocation;
            if remaining[idx] < -problem.servers[idx].capacity * CAPACITY_TOL {
                return Err(Error::InvalidAllocation(format!("server {} over-committed by the prefix", s.0)));
            }
            remaining[idx] = remaining[idx].max(0.0);
        }
    }
    Ok(remaining)
}

/// Largest allocation the policy still permits on `server`.
fn max_level(policy: AllocationPolicy, server: &EdgeServer, remaining: f64) -> Option<f64> {
    allocation_levels(policy, server, remaining).last().copied()
}

/// Optimistic average objective of every feasible completion of `node`.
pub fn lower_bound(problem: &Problem, node: &SearchNode, policy: AllocationPolicy) -> Result<f64> {
    let n = problem.candidates.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no candidates".into()));
    }
    let remaining = remaining_after(problem, &node.prefix)?;
    let links = link_servers(problem)?;
    let tail = tail_bound(problem, &links, node.prefix.len(), &remaining, policy, node.partial_sum)?;
    Ok(tail / n as f64)
}

/// Left fold of per-candidate optimistic rates onto `acc`, in candidate order,
/// so the result never exceeds the fold of the true rates.
fn tail_bound(
    problem: &Problem,
    links: &[Vec<usize>],
    from: usize,
    remaining: &[f64],
    policy: AllocationPolicy,
    mut acc: f64,
) -> Result<f64> {
    for (c, servers) in problem.candidates.iter().zip(links).skip(from) {
        let mut best = c.local_rate()?;
        for &s in servers {
            if let Some(a) = max_level(policy, &problem.servers[s], remaining[s]) {
                best = best.min(c.compute_only_rate(a)?);
            }
        }
        acc += best;
    }
    Ok(acc)
}

fn link_servers(problem: &Problem) -> Result<Vec<Vec<usize>>> {
    problem
        .candidates
        .iter()
        .map(|c| {
            c.links
                .iter()
                .map(|l| {
                    problem
                        .server_index(l.server)
                        .ok_or_else(|| Error::NotFound(format!("edge server {} (task {})", l.server.0, c.task_id.0)))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Choice {
    link: Option<usize>,
    /// Index into the server snapshot; meaningless when `link` is `None`.
    server: usize,
    allocation: f64,
    rate: f64,
}

impl Choice {
    fn cmp_key(&self, other: &Self, problem: &Problem) -> Ordering {
        match (self.link, other.link) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(_), Some(_)) => problem.servers[self.server]
                .id
                .cmp(&problem.servers[other.server].id)
                .then(self.allocation.total_cmp(&other.allocation)),
        }
    }
}

fn lex_cmp(a: &[Choice], b: &[Choice], problem: &Problem) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.cmp_key(y, problem))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

struct Search<'p> {
    problem: &'p Problem,
    links: Vec<Vec<usize>>,
    opts: BnbOptions,
    remaining: Vec<f64>,
    current: Vec<Choice>,
    best: Option<(f64, Vec<Choice>)>,
    stats: SearchStats,
}

impl Search<'_> {
    fn options(&self, depth: usize) -> Result<Vec<Choice>> {
        let c = &self.problem.candidates[depth];
        let mut out = vec![Choice {
            link: None,
            server: 0,
            allocation: 0.0,
            rate: c.local_rate()?,
        }];
        for (li, (link, &s)) in c.links.iter().zip(&self.links[depth]).enumerate() {
            for a in allocation_levels(self.opts.policy, &self.problem.servers[s], self.remaining[s]) {
                out.push(Choice {
                    link: Some(li),
                    server: s,
                    allocation: a,
                    rate: c.offload_rate(link, a)?,
                });
            }
        }
        // most promising first so a good incumbent appears early
        out.sort_by(|a, b| a.rate.total_cmp(&b.rate).then_with(|| a.cmp_key(b, self.problem)));
        Ok(out)
    }

    fn dfs(&mut self, depth: usize, sum: f64) -> Result<()> {
        self.stats.nodes += 1;
        if depth == self.problem.candidates.len() {
            self.stats.leaves += 1;
            let better = match &self.best {
                None => true,
                Some((best, choices)) => {
                    sum < *best || (sum == *best && lex_cmp(&self.current, choices, self.problem).is_lt())
                }
            };
            if better {
                self.best = Some((sum, self.current.clone()));
            }
            return Ok(());
        }
        for choice in self.options(depth)? {
            let saved = choice.link.map(|_| {
                let before = self.remaining[choice.server];
                self.remaining[choice.server] = (before - choice.allocation).max(0.0);
                before
            });
            let child_sum = sum + choice.rate;
            let pruned = match (&self.best, self.opts.prune) {
                (Some((best, _)), true) => {
                    tail_bound(self.problem, &self.links, depth + 1, &self.remaining, self.opts.policy, child_sum)? > *best
                }
                _ => false,
            };
            if pruned {
                self.stats.pruned += 1;
            } else {
                self.current.push(choice);
                self.dfs(depth + 1, child_sum)?;
                self.current.pop();
            }
            if let Some(before) = saved {
                self.remaining[choice.server] = before;
            }
        }
        Ok(())
    }
}

/// Exact minimizer of the candidates' average reduction rate over the
/// discrete option space defined by `opts.policy`.
pub fn search(problem: &Problem, opts: BnbOptions) -> Result<SearchOutcome> {
    if problem.candidates.is_empty() {
        return Err(Error::InvalidParameter("branch-and-bound needs at least one candidate".into()));
    }
    if let AllocationPolicy::Quantized(q) = opts.policy {
        q.validate()?;
    }
    for c in &problem.candidates {
        c.subtask.validate()?;
    }
    let mut s = Search {
        problem,
        links: link_servers(problem)?,
        opts,
        remaining: problem.remaining(),
        current: Vec::with_capacity(problem.candidates.len()),
        best: None,
        stats: SearchStats::default(),
    };
    s.dfs(0, 0.0)?;
    let (_, choices) = s.best.ok_or_else(|| Error::Invariant("search finished without a solution".into()))?;
    let assignments: Vec<Assignment> = choices
        .iter()
        .map(|ch| match ch.link {
            None => Assignment::LOCAL,
            Some(_) => Assignment {
                server: Some(problem.servers[ch.server].id),
                allocation: ch.allocation,
            },
        })
        .collect();
    Ok(SearchOutcome {
        decisions: decision_set(problem, &assignments)?,
        assignments,
        stats: s.stats,
    })
}

/// Joint server selection and progressive `C, 2C, ...` allocation.
pub fn branch_and_bound(problem: &Problem, quantum: Quantum) -> Result<DecisionSet> {
    Ok(search(problem, BnbOptions::quantized(quantum))?.decisions)
}
