mod common;

use privoffload::mobility::{distance, ServerId};
use privoffload::sim::experiment::experiment_cells;
use privoffload::sim::{
    generate_scenario, run, run_experiment, shadow_config, simulate, task_multiplier, ExperimentKind, PrivacyMode,
    Range, ScenarioConfig, Simulation,
};

fn small(seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.seed = seed;
    c.scenario.vehicle_count = 12;
    c.scenario.horizon_steps = 40;
    c
}

/// One static vehicle next to one idle, very fast roadside unit running one
/// single-subtask job.
fn lone_vehicle() -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.scenario.road_length_m = 500.0;
    c.scenario.lanes = 1;
    c.scenario.vehicle_count = 1;
    c.scenario.horizon_steps = 1;
    c.vehicle.speed_mps = Range(0.0, 0.0);
    c.vehicle.capacity = Range(1e8, 1e8);
    c.vehicle.server_fraction = 0.0;
    c.rsu.capacity = Range(1e10, 1e10);
    c.task.subtasks = Range(1, 1);
    c.task.workload = Range(1e9, 1e9);
    c.task.input_bits = Range(1e6, 1e6);
    c.task.lambda = Range(0.5, 0.5);
    c.task.lo_ratio = Range(0.2, 0.2);
    c.task.eo_ratio = Range(0.5, 0.5);
    c.task.think_steps = Range(0, 0);
    c.privacy.mode = PrivacyMode::None;
    c
}

#[test]
fn scenario_is_reproducible() {
    let a = generate_scenario(&small(5)).unwrap();
    let b = generate_scenario(&small(5)).unwrap();
    assert_eq!(format!("{:?}", a.scene), format!("{:?}", b.scene));
    let c = generate_scenario(&small(6)).unwrap();
    assert_ne!(format!("{:?}", a.scene), format!("{:?}", c.scene));
}

#[test]
fn empty_scenario_has_no_data() {
    let mut c = small(1);
    c.scenario.vehicle_count = 0;
    let s = run(&c).unwrap();
    assert!(!s.records.is_empty());
    assert!(s.records.iter().all(|r| r.avg_reduction_rate.is_none() && r.task_multiplier.is_none()));
    assert_eq!(task_multiplier(&s), None);
}

#[test]
fn lone_vehicle_offloads_with_hand_computed_rate() {
    let cfg = lone_vehicle();
    let scenario = generate_scenario(&cfg).unwrap();
    let v = scenario.scene.vehicles[0].clone();
    let rsu = scenario.scene.rsus[0].clone();
    let mut sim = Simulation::new(&cfg).unwrap().with_decision_log();
    sim.run_to_end().unwrap();

    let log = sim.decision_log();
    assert_eq!(log.len(), 1);
    assert_eq!(log[0].server, Some(ServerId(0)));
    assert_eq!(log[0].allocation, 1e10);

    let d = distance(v.position, rsu.position);
    let shannon = |p: f64| 10e6 * (1.0 + p * 1e-3 * d.powf(-3.0) / 1e-13).log2();
    let delay = 0.5e9 / 1e10 + 0.5e9 / 1e8 + 1e6 * 0.2 / shannon(0.1) + 1e6 * 0.2 * 0.5 / shannon(0.01);
    let expected = delay / (1e9 / 1e8);
    let got = sim.trace().records.last().unwrap().avg_reduction_rate.unwrap();
    assert!(common::rel_close(got, expected, 1e-12), "{got} vs {expected}");
    assert!(got < 1.0);
}

#[test]
fn unreachable_servers_mean_local_execution() {
    let mut c = small(2);
    c.optimizer.radius_m = 1e-3;
    let t = simulate(&c).unwrap();
    let rates: Vec<f64> = t.records.iter().filter_map(|r| r.avg_reduction_rate).collect();
    assert!(!rates.is_empty());
    assert!(rates.iter().all(|&r| r == 1.0));
}

#[test]
fn shadow_run_ignores_channel_and_privacy() {
    let base = simulate(&shadow_config(&small(3))).unwrap();
    let mut other = small(3);
    other.channel.bandwidth_hz = 1e3;
    other.channel.path_loss_exp = 4.0;
    other.privacy.mode = PrivacyMode::Rr;
    other.privacy.epsilon = 0.3;
    other.optimizer.algorithm = privoffload::sim::Algorithm::Rm;
    assert_eq!(simulate(&shadow_config(&other)).unwrap(), base);
    assert!(base.records.iter().filter_map(|r| r.avg_reduction_rate).all(|r| r == 1.0));
}

#[test]
fn profitable_offloading_beats_local_on_both_metrics() {
    let mut c = lone_vehicle();
    c.scenario.vehicle_count = 15;
    c.scenario.lanes = 2;
    c.scenario.horizon_steps = 60;
    c.vehicle.capacity = Range(1e8, 2e8);
    c.rsu.capacity = Range(4e10, 4e10);
    c.task.subtasks = Range(2, 4);
    c.task.think_steps = Range(0, 3);
    c.optimizer.radius_m = 1000.0;
    let mut sim = Simulation::new(&c).unwrap().with_decision_log();
    sim.run_to_end().unwrap();
    // every offload the fixture makes is faster than running locally
    let scenario = generate_scenario(&c).unwrap();
    for d in sim.decision_log().iter().filter(|d| d.server.is_some()) {
        let v = &scenario.scene.vehicles[(d.task_id.0 >> 32) as usize];
        assert!(d.true_delay_s < 1e9 / v.compute_capacity, "{d:?}");
    }
    let s = run(&c).unwrap();
    assert!(s.final_reduction_rate().unwrap() < 1.0);
    assert!(task_multiplier(&s).unwrap() >= 1.0);
}

#[test]
fn no_privacy_estimates_equal_the_truth() {
    let mut c = small(4);
    c.privacy.mode = PrivacyMode::None;
    let mut sim = Simulation::new(&c).unwrap().with_decision_log();
    sim.run_to_end().unwrap();
    assert!(sim.decision_log().iter().any(|d| d.server.is_some()));
    for d in sim.decision_log() {
        assert!(common::rel_close(d.estimated_delay_s, d.true_delay_s, 1e-9), "{d:?}");
    }
}

#[test]
fn runs_are_deterministic_and_counters_monotone() {
    for mode in [PrivacyMode::None, PrivacyMode::Rr, PrivacyMode::Ldp] {
        let mut c = small(8);
        c.privacy.mode = mode;
        let a = run(&c).unwrap();
        assert_eq!(a, run(&c).unwrap());
        for w in a.records.windows(2) {
            assert!(w[0].completed_tasks <= w[1].completed_tasks);
            assert!(w[0].completed_tasks_local_baseline <= w[1].completed_tasks_local_baseline);
            assert_eq!(w[1].step, w[0].step + 1);
        }
        for r in &a.records {
            if r.completed_tasks_local_baseline > 0 {
                assert_eq!(r.task_multiplier, Some(r.completed_tasks as f64 / r.completed_tasks_local_baseline as f64));
            }
        }
    }
}

#[test]
fn windowed_metric_differs_from_cumulative() {
    let mut c = small(9);
    let cumulative = run(&c).unwrap();
    c.metrics.window_steps = 10;
    let windowed = run(&c).unwrap();
    assert_eq!(cumulative.records.len(), windowed.records.len());
    assert_eq!(task_multiplier(&cumulative), task_multiplier(&windowed));
    assert_ne!(cumulative, windowed);
}

#[test]
fn experiment_tables_have_the_designed_shape() {
    let mut base = small(0);
    base.scenario.vehicle_count = 5;
    base.scenario.horizon_steps = 10;
    for (n, per_seed) in [(1, 3), (2, 4), (3, 8)] {
        let kind = ExperimentKind::from_number(n).unwrap();
        let t = run_experiment(kind, &base, &[0, 1]).unwrap();
        assert_eq!(t.cells.len(), 2 * per_seed);
        assert_eq!(t.curves().len(), per_seed);
        let labels: Vec<_> = experiment_cells(kind, &base, &[0, 1]).into_iter().map(|(l, _)| l).collect();
        assert_eq!(t.cells.iter().map(|c| c.label.clone()).collect::<Vec<_>>(), labels);
    }
}
