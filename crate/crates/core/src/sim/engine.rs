//! The discrete-time loop. Decisions are made at step boundaries on the
//! decision centre's (possibly perturbed) view; delays are computed from true
//! positions at the decision step.
//!
//! A subtask that completes at time `t` lets the next subtask start at the
//! first step boundary `k * dt >= t`. Vehicles issue a new task a few idle
//! steps after finishing one, until the horizon; afterwards the run drains.

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, PrivacyMode, ScenarioConfig};
use super::metrics::{MetricsSeries, RateAccumulator, RunTrace, TraceRecord};
use super::privacy::{ContextReporter, ContextTable};
use super::scenario::{generate_scenario, Scenario, TaskGenerator};
use crate::error::{Error, Result};
use crate::latency::{local_reference_delay, total_task_delay, TaskId, TaskSpec};
use crate::mobility::{distance, transmission_rate, EntityId, FadingGains, Host, Position, Scene, ServerId, VehicleId};
use crate::optimizer::{
    bm_baseline, branch_and_bound, candidate_set, cm_baseline, feasible, rm_baseline, Candidate, DecisionSet, Link,
    OffloadDecision, Problem, Quantum, CAPACITY_TOL,
};
use crate::rng::{stream, SimRng};

/// Completion times within this many seconds of a step boundary count as done.
const TIME_TOL: f64 = 1e-9;

/// One committed decision with the decision centre's estimate next to the
/// delay actually incurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub step: u64,
    pub task_id: TaskId,
    pub subtask: usize,
    pub server: Option<ServerId>,
    pub allocation: f64,
    pub estimated_delay_s: f64,
    pub true_delay_s: f64,
}

#[derive(Debug, Clone)]
struct Running {
    server: Option<usize>,
    allocation: f64,
    delay_s: f64,
    completes_at: f64,
}

#[derive(Debug, Clone)]
struct ActiveTask {
    spec: TaskSpec,
    next: usize,
    running: Option<Running>,
    delay_sum: f64,
    reference_sum: f64,
    think_after: u64,
}

#[derive(Debug, Clone, Default)]
struct VehicleRuntime {
    issued: u64,
    next_arrival: Option<u64>,
    task: Option<ActiveTask>,
}

pub struct Simulation {
    cfg: ScenarioConfig,
    scene: Scene,
    tasks: TaskGenerator,
    reporter: Option<ContextReporter>,
    table: ContextTable,
    fading: FadingGains,
    report_rngs: Vec<SimRng>,
    rm_rng: SimRng,
    vehicles: Vec<VehicleRuntime>,
    step: u64,
    completed: u64,
    rates: RateAccumulator,
    trace: RunTrace,
    log: Option<Vec<DecisionRecord>>,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let scenario = generate_scenario(cfg)?;
        Self::from_scenario(cfg, scenario)
    }

    /// Runs a hand-built scenario under `cfg`'s timing, privacy and optimizer
    /// settings.
    pub fn from_scenario(cfg: &ScenarioConfig, scenario: Scenario) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.seed;
        let Scenario { scene, tasks } = scenario;
        let reporter = if cfg.optimizer.algorithm == Algorithm::Local {
            None
        } else {
            let initial: Vec<(f64, f64)> = scene
                .vehicles
                .iter()
                .map(|v| Ok((scene.road_position(EntityId::Vehicle(v.id), 0, cfg.scenario.dt_s)?.x, v.speed)))
                .collect::<Result<_>>()?;
            Some(ContextReporter::new(&cfg.privacy, &initial, seed)?)
        };
        let horizon = cfg.scenario.horizon_steps;
        let vehicles = scene
            .vehicles
            .iter()
            .map(|v| VehicleRuntime {
                next_arrival: Some(tasks.first_arrival(v.id)).filter(|&a| a < horizon),
                ..VehicleRuntime::default()
            })
            .collect();
        Ok(Self {
            table: ContextTable::new(scene.vehicles.len(), cfg.scenario.dt_s, scene.wrap_length),
            fading: FadingGains::new(seed, cfg.channel.fading),
            report_rngs: (0..scene.vehicles.len() as u64).map(|v| stream(seed, "report", &[v])).collect(),
            rm_rng: stream(seed, "rm", &[]),
            rates: RateAccumulator::new(cfg.metrics.window_steps),
            cfg: cfg.clone(),
            scene,
            tasks,
            reporter,
            vehicles,
            step: 0,
            completed: 0,
            trace: RunTrace::default(),
            log: None,
        })
    }

    /// Keeps a record of every committed decision.
    pub fn with_decision_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn decision_log(&self) -> &[DecisionRecord] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn current_step(&self) -> u64 {
        self.step
    }

    pub fn completed_tasks(&self) -> u64 {
        self.completed
    }

    /// Past the horizon with nothing left in flight.
    pub fn is_finished(&self) -> bool {
        self.step >= self.cfg.scenario.horizon_steps
            && self.vehicles.iter().all(|v| v.task.is_none() && v.next_arrival.is_none())
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        let limit = self.cfg.scenario.horizon_steps.saturating_add(self.cfg.scenario.max_drain_steps);
        while !self.is_finished() {
            if self.step >= limit {
                return Err(Error::Invariant(format!("tasks still in flight after {} drain steps", self.cfg.scenario.max_drain_steps)));
            }
            self.step()?;
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let k = self.step;
        self.release(k);
        self.issue(k);
        let ready: Vec<usize> = (0..self.vehicles.len())
            .filter(|&v| self.vehicles[v].task.as_ref().is_some_and(|t| t.running.is_none()))
            .collect();
        self.report(k, &ready)?;
        self.decide(k, &ready)?;
        self.check_invariants()?;
        let avg = self.rates.average(k);
        self.trace.records.push(TraceRecord {
            step: k,
            avg_reduction_rate: avg,
            completed_tasks: self.completed,
        });
        self.step += 1;
        Ok(())
    }

    fn now(&self, k: u64) -> f64 {
        k as f64 * self.cfg.scenario.dt_s
    }

    fn release(&mut self, k: u64) {
        let now = self.now(k);
        let horizon = self.cfg.scenario.horizon_steps;
        for v in 0..self.vehicles.len() {
            let rt = &mut self.vehicles[v];
            let Some(task) = rt.task.as_mut() else { continue };
            let Some(run) = task.running.as_ref().filter(|r| r.completes_at <= now + TIME_TOL) else { continue };
            let sub = &task.spec.subtasks[task.next];
            task.delay_sum += run.delay_s;
            task.reference_sum += local_reference_delay(sub.workload, self.scene.vehicles[v].compute_capacity);
            if let Some(s) = run.server {
                let server = &mut self.scene.servers[s];
                server.committed = (server.committed - run.allocation).max(0.0);
            }
            task.running = None;
            task.next += 1;
            if task.next == task.spec.subtasks.len() {
                self.rates.push(k, task.delay_sum / task.reference_sum);
                self.completed += 1;
                rt.next_arrival = Some(k + task.think_after).filter(|&a| a < horizon);
                rt.task = None;
            }
        }
    }

    fn issue(&mut self, k: u64) {
        for (v, rt) in self.vehicles.iter_mut().enumerate() {
            if rt.task.is_none() && rt.next_arrival == Some(k) {
                let (spec, think_after) = self.tasks.task(VehicleId(v as u32), rt.issued, k);
                rt.issued += 1;
                rt.next_arrival = None;
                rt.task = Some(ActiveTask {
                    spec,
                    next: 0,
                    running: None,
                    delay_sum: 0.0,
                    reference_sum: 0.0,
                    think_after,
                });
            }
        }
    }

    /// Every vehicle reports once at the first step; afterwards only vehicles
    /// with a ready subtask do.
    fn report(&mut self, k: u64, ready: &[usize]) -> Result<()> {
        let Some(reporter) = &self.reporter else { return Ok(()) };
        let all: Vec<usize>;
        let who = if k == 0 {
            all = (0..self.vehicles.len()).collect();
            &all
        } else {
            ready
        };
        let dt = self.cfg.scenario.dt_s;
        for &v in who {
            let state = &self.scene.vehicles[v];
            let x = self.scene.road_position(EntityId::Vehicle(state.id), k, dt)?.x;
            let ctx = reporter.report(x, state.speed, &mut self.report_rngs[v])?;
            self.table.record(v, ctx, k);
        }
        Ok(())
    }

    fn estimated_position(&self, v: usize, k: u64) -> Result<Position> {
        let state = &self.scene.vehicles[v];
        let x = match self.table.estimate_x(v, k) {
            Some(x) => x,
            None => self.scene.road_position(EntityId::Vehicle(state.id), k, self.cfg.scenario.dt_s)?.x,
        };
        Ok(Position { x, ..state.position })
    }

    fn candidate(&mut self, v: usize, k: u64) -> Result<Candidate> {
        let me = self.estimated_position(v, k)?;
        let state = self.scene.vehicles[v].clone();
        let task = self.vehicles[v].task.as_ref().expect("ready vehicle has a task");
        let subtask = task.spec.subtasks[task.next];
        let task_id = task.spec.id;
        let mut links = Vec::new();
        for i in 0..self.scene.servers.len() {
            let (id, host) = (self.scene.servers[i].id, self.scene.servers[i].host);
            let there = match host {
                Host::Vehicle(h) if h == state.id => continue,
                Host::Vehicle(h) => self.estimated_position(h.0 as usize, k)?,
                Host::Rsu(r) => self.scene.rsu(r)?.position,
            };
            let d = distance(me, there);
            if d > self.cfg.optimizer.radius_m {
                continue;
            }
            let (tx, rx) = (EntityId::Vehicle(state.id), EntityId::from(host));
            let ch = &self.cfg.channel;
            let up = transmission_rate(state.transmit_power, d, self.fading.gain(tx, rx, k), ch)?;
            let down = transmission_rate(self.scene.transmit_power(rx)?, d, self.fading.gain(rx, tx, k), ch)?;
            links.push(Link {
                server: id,
                distance_m: d,
                uplink_bps: up,
                downlink_bps: down,
            });
        }
        Ok(Candidate {
            task_id,
            vehicle: state.id,
            subtask,
            local_capacity: state.compute_capacity,
            links,
        })
    }

    fn solve(&mut self, problem: &Problem) -> Result<DecisionSet> {
        match self.cfg.optimizer.algorithm {
            Algorithm::Bnb => branch_and_bound(problem, Quantum::Divisor(self.cfg.optimizer.quantum_divisor)),
            Algorithm::Rm => rm_baseline(problem, &mut self.rm_rng),
            Algorithm::Cm => cm_baseline(problem),
            Algorithm::Bm => bm_baseline(problem),
            Algorithm::Local => unreachable!("the all-local policy never builds a problem"),
        }
    }

    fn decide(&mut self, k: u64, ready: &[usize]) -> Result<()> {
        if self.cfg.optimizer.algorithm == Algorithm::Local {
            for &v in ready {
                self.commit(k, v, None, 0.0, None)?;
            }
            return Ok(());
        }
        let mut pending = ready.iter().map(|&v| self.candidate(v, k)).collect::<Result<Vec<_>>>()?;
        pending.sort_by_key(|c| c.task_id);
        let m = self.cfg.optimizer.m as usize;
        while !pending.is_empty() {
            let first = pending.remove(0);
            let set = candidate_set(&first, &pending, m)?;
            pending.retain(|c| !set.iter().any(|s| s.task_id == c.task_id));
            let problem = Problem {
                candidates: set,
                servers: self.scene.servers.clone(),
                step: k,
            };
            let ds = self.solve(&problem)?;
            if !feasible(&ds, &self.scene.servers) || ds.decisions.len() != problem.candidates.len() {
                return Err(Error::Invariant(format!("step {k}: decision set violates capacity or coverage")));
            }
            for d in &ds.decisions {
                let cand = problem
                    .candidates
                    .iter()
                    .find(|c| c.task_id == d.task_id)
                    .ok_or_else(|| Error::Invariant(format!("step {k}: decision for unknown task {}", d.task_id.0)))?;
                self.commit(k, cand.vehicle.0 as usize, d.server, d.allocation, Some((cand, d)))?;
            }
        }
        Ok(())
    }

    fn commit(
        &mut self,
        k: u64,
        v: usize,
        server: Option<ServerId>,
        allocation: f64,
        estimate: Option<(&Candidate, &OffloadDecision)>,
    ) -> Result<()> {
        let dt = self.cfg.scenario.dt_s;
        let now = self.now(k);
        let state_id = self.scene.vehicles[v].id;
        let capacity = self.scene.vehicles[v].compute_capacity;
        let (sub, task_id, index) = {
            let t = self.vehicles[v].task.as_ref().expect("committed vehicle has a task");
            (t.spec.subtasks[t.next], t.spec.id, t.next)
        };
        let (index_of_server, delay) = match server {
            None => (None, total_task_delay(&sub, None, capacity, 0.0, 0.0)?.total_s),
            Some(s) => {
                let idx = self
                    .scene
                    .servers
                    .iter()
                    .position(|e| e.id == s)
                    .ok_or_else(|| Error::Invariant(format!("step {k}: unknown server {}", s.0)))?;
                let (up, down) = self.scene.link_rates(state_id, s, k, dt, &self.cfg.channel, &mut self.fading)?;
                self.scene.servers[idx].committed += allocation;
                (Some(idx), total_task_delay(&sub, Some(allocation), capacity, up, down)?.total_s)
            }
        };
        if let (Some(log), Some((cand, d))) = (self.log.as_mut(), estimate) {
            let estimated = match d.server.and_then(|s| cand.link(s)) {
                None => total_task_delay(&sub, None, capacity, 0.0, 0.0)?.total_s,
                Some(l) => total_task_delay(&sub, Some(allocation), capacity, l.uplink_bps, l.downlink_bps)?.total_s,
            };
            log.push(DecisionRecord {
                step: k,
                task_id,
                subtask: index,
                server,
                allocation,
                estimated_delay_s: estimated,
                true_delay_s: delay,
            });
        }
        let task = self.vehicles[v].task.as_mut().expect("committed vehicle has a task");
        task.running = Some(Running {
            server: index_of_server,
            allocation,
            delay_s: delay,
            completes_at: now + delay,
        });
        Ok(())
    }

    /// Capacity conservation and one server per running subtask. Committed
    /// totals are rebuilt from the running set to avoid drift.
    fn check_invariants(&mut self) -> Result<()> {
        let k = self.step;
        let mut totals = vec![0.0; self.scene.servers.len()];
        for rt in &self.vehicles {
            let Some(run) = rt.task.as_ref().and_then(|t| t.running.as_ref()) else { continue };
            match run.server {
                Some(s) if run.allocation > 0.0 => totals[s] += run.allocation,
                Some(_) => return Err(Error::Invariant(format!("step {k}: offloaded subtask without allocation"))),
                None if run.allocation != 0.0 => {
                    return Err(Error::Invariant(format!("step {k}: local subtask holds an allocation")))
                }
                None => {}
            }
        }
        for (server, total) in self.scene.servers.iter_mut().zip(totals) {
            if total > server.capacity * (1.0 + CAPACITY_TOL) {
                return Err(Error::Invariant(format!(
                    "step {k}: server {} holds {total} of {} cycles/s",
                    server.id.0, server.capacity
                )));
            }
            server.committed = total;
        }
        Ok(())
    }
}

/// The configuration of the all-local shadow run: same tasks and local
/// capacities, no offloading and no reporting.
pub fn shadow_config(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.optimizer.algorithm = Algorithm::Local;
    c.privacy.mode = PrivacyMode::None;
    c
}

/// A single engine run without the shadow baseline.
pub fn simulate(cfg: &ScenarioConfig) -> Result<RunTrace> {
    let mut sim = Simulation::new(cfg)?;
    sim.run_to_end()?;
    Ok(sim.trace)
}

/// Runs `cfg` and its all-local shadow and merges them into one series.
pub fn run(cfg: &ScenarioConfig) -> Result<MetricsSeries> {
    let main = simulate(cfg)?;
    let shadow = simulate(&shadow_config(cfg))?;
    Ok(MetricsSeries::merge(&main, &shadow, cfg.scenario.dt_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.scenario.vehicle_count = 10;
        c.scenario.horizon_steps = 40;
        c
    }

    #[test]
    fn shadow_run_is_exactly_local() {
        let t = simulate(&shadow_config(&small())).unwrap();
        assert!(t.records.iter().filter_map(|r| r.avg_reduction_rate).all(|r| r == 1.0));
        assert!(t.records.last().unwrap().completed_tasks > 0);
    }

    #[test]
    fn counters_monotone_and_deterministic() {
        let a = run(&small()).unwrap();
        let b = run(&small()).unwrap();
        assert_eq!(a, b);
        assert!(a.records.windows(2).all(|w| w[0].completed_tasks <= w[1].completed_tasks));
        assert!(a.records.windows(2).all(|w| w[0].completed_tasks_local_baseline <= w[1].completed_tasks_local_baseline));
    }

    #[test]
    fn none_mode_estimates_are_exact() {
        let mut c = small();
        c.privacy.mode = PrivacyMode::None;
        let mut sim = Simulation::new(&c).unwrap().with_decision_log();
        sim.run_to_end().unwrap();
        assert!(sim.decision_log().iter().any(|d| d.server.is_some()));
        for d in sim.decision_log() {
            let tol = 1e-9 * d.true_delay_s;
            assert!((d.estimated_delay_s - d.true_delay_s).abs() <= tol, "{d:?}");
        }
    }
}
