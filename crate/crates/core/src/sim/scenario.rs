//! Scenario generation: road geometry, vehicles, roadside units, edge servers
//! and the per-vehicle task streams.

use rand::Rng;

use super::config::{Range, ScenarioConfig, TaskConfig};
use crate::error::Result;
use crate::latency::{SubtaskSpec, TaskId, TaskSpec};
use crate::mobility::{EdgeServer, Host, Position, RoadsideUnit, RsuId, Scene, ServerId, VehicleId, VehicleState};
use crate::rng::{stream, SimRng};

/// Generated world plus the deterministic task source.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub scene: Scene,
    pub tasks: TaskGenerator,
}

fn draw(rng: &mut SimRng, r: Range<f64>) -> f64 {
    if r.min() == r.max() {
        r.min()
    } else {
        rng.gen_range(r.min()..=r.max())
    }
}

fn draw_int(rng: &mut SimRng, r: Range<u64>) -> u64 {
    rng.gen_range(r.min()..=r.max())
}

/// Builds the world for `cfg.seed`. RSUs sit at the centres of a
/// `spacing_m` grid along the road, `offset_m` beyond the far road edge.
/// Server ids list RSU servers first, then vehicle-hosted servers in
/// vehicle order.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let road = &cfg.scenario;
    let seed = cfg.seed;

    let rsu_count = (road.road_length_m / cfg.rsu.spacing_m).floor() as u32;
    let rsu_y = f64::from(road.lanes) * road.lane_width_m + cfg.rsu.offset_m;
    let mut rsus = Vec::with_capacity(rsu_count as usize);
    let mut servers = Vec::new();
    for i in 0..rsu_count {
        let mut rng = stream(seed, "rsu", &[u64::from(i)]);
        let x = (f64::from(i) + 0.5) * cfg.rsu.spacing_m;
        let capacity = draw(&mut rng, cfg.rsu.capacity);
        rsus.push(RoadsideUnit {
            id: RsuId(i),
            position: Position::new(x, rsu_y, cfg.rsu.height_m),
            compute_capacity: capacity,
            transmit_power: cfg.rsu.transmit_power_w,
        });
        servers.push(EdgeServer::new(ServerId(i), Host::Rsu(RsuId(i)), capacity));
    }

    let mut vehicles = Vec::with_capacity(road.vehicle_count as usize);
    for i in 0..road.vehicle_count {
        let mut rng = stream(seed, "vehicle", &[u64::from(i)]);
        let lane = rng.gen_range(0..road.lanes);
        let x = rng.gen_range(0.0..road.road_length_m);
        let speed = draw(&mut rng, cfg.vehicle.speed_mps);
        let capacity = draw(&mut rng, cfg.vehicle.capacity);
        let hosts_server = rng.gen_bool(cfg.vehicle.server_fraction);
        let id = VehicleId(i);
        vehicles.push(VehicleState {
            id,
            position: Position::new(x, (f64::from(lane) + 0.5) * road.lane_width_m, 0.0),
            speed,
            compute_capacity: capacity,
            transmit_power: cfg.vehicle.transmit_power_w,
        });
        if hosts_server {
            servers.push(EdgeServer::new(ServerId(servers.len() as u32), Host::Vehicle(id), capacity));
        }
    }

    Ok(Scenario {
        scene: Scene {
            vehicles,
            rsus,
            servers,
            wrap_length: road.wrap_road.then_some(road.road_length_m),
        },
        tasks: TaskGenerator {
            seed,
            params: cfg.task.clone(),
        },
    })
}

/// Issues each vehicle's k-th task from a stream keyed by (vehicle, k), so a
/// vehicle's task sequence is the same whatever the offloading policy.
#[derive(Debug, Clone)]
pub struct TaskGenerator {
    seed: u64,
    params: TaskConfig,
}

impl TaskGenerator {
    pub fn new(seed: u64, params: TaskConfig) -> Self {
        Self { seed, params }
    }

    /// Step at which the vehicle's first task arrives.
    pub fn first_arrival(&self, vehicle: VehicleId) -> u64 {
        let mut rng = stream(self.seed, "arrival", &[u64::from(vehicle.0)]);
        draw_int(&mut rng, self.params.think_steps)
    }

    /// The vehicle's `index`-th task and the idle steps that follow it.
    pub fn task(&self, vehicle: VehicleId, index: u64, arrival_step: u64) -> (TaskSpec, u64) {
        let p = &self.params;
        let mut rng = stream(self.seed, "task", &[u64::from(vehicle.0), index]);
        let count = rng.gen_range(p.subtasks.min()..=p.subtasks.max());
        let subtasks = (0..count)
            .map(|_| SubtaskSpec {
                workload: draw(&mut rng, p.workload),
                input_bits: draw(&mut rng, p.input_bits),
                lambda: draw(&mut rng, p.lambda),
                lo_ratio: draw(&mut rng, p.lo_ratio),
                eo_ratio: draw(&mut rng, p.eo_ratio),
            })
            .collect();
        let think = draw_int(&mut rng, p.think_steps);
        let spec = TaskSpec {
            id: TaskId((u64::from(vehicle.0) << 32) | index),
            owner: vehicle,
            subtasks,
            arrival_step,
        };
        (spec, think)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rsus_on_centred_grid() {
        let s = generate_scenario(&ScenarioConfig::default()).unwrap();
        let xs: Vec<f64> = s.scene.rsus.iter().map(|r| r.position.x).collect();
        assert_eq!(xs, vec![250.0, 750.0, 1250.0, 1750.0]);
        assert!(s.scene.rsus.iter().all(|r| r.position.y == 32.0 && r.position.z == 10.0));
    }

    #[test]
    fn vehicles_within_configured_ranges() {
        let cfg = ScenarioConfig::default();
        let s = generate_scenario(&cfg).unwrap();
        assert_eq!(s.scene.vehicles.len(), 40);
        for v in &s.scene.vehicles {
            assert!((0.0..2000.0).contains(&v.position.x));
            assert!([1.5, 4.5, 7.5, 10.5].contains(&v.position.y));
            assert!((10.0..=30.0).contains(&v.speed));
            assert!((5e8..=1e9).contains(&v.compute_capacity));
        }
        for (i, s) in s.scene.servers.iter().enumerate() {
            assert_eq!(s.id, ServerId(i as u32));
        }
    }

    #[test]
    fn empty_scenario_is_valid() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.vehicle_count = 0;
        let s = generate_scenario(&cfg).unwrap();
        assert!(s.scene.vehicles.is_empty());
        assert_eq!(s.scene.servers.len(), 4);
    }

    #[test]
    fn task_stream_is_keyed() {
        let g = TaskGenerator::new(3, TaskConfig::default());
        let (a, ta) = g.task(VehicleId(2), 5, 10);
        let (b, tb) = g.task(VehicleId(2), 5, 99);
        assert_eq!(a.subtasks, b.subtasks);
        assert_eq!(ta, tb);
        assert!((3..=8).contains(&a.subtasks.len()));
        let (c, _) = g.task(VehicleId(2), 6, 10);
        assert_ne!(a.subtasks, c.subtasks);
    }
}
