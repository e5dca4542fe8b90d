//! Scenario geometry and the Shannon-rate radio link.
//!
//! Vehicles move at constant speed along +x in fixed lanes; roadside units are
//! static. Every roadside unit, and every vehicle flagged as a host, carries
//! one edge server whose capacity equals its host's compute capacity.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Below this separation the path-loss term is evaluated at this distance.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Euclidean distance in metres.
pub fn distance(a: Position, b: Position) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VehicleId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RsuId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServerId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityId {
    Vehicle(VehicleId),
    Rsu(RsuId),
}

impl EntityId {
    fn key(self) -> u64 {
        match self {
            EntityId::Vehicle(v) => u64::from(v.0) << 1,
            EntityId::Rsu(r) => (u64::from(r.0) << 1) | 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: VehicleId,
    pub position: Position,
    /// m/s along +x
    pub speed: f64,
    /// cycles/s
    pub compute_capacity: f64,
    /// W
    pub transmit_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadsideUnit {
    pub id: RsuId,
    pub position: Position,
    pub compute_capacity: f64,
    pub transmit_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Host {
    Vehicle(VehicleId),
    Rsu(RsuId),
}

impl From<Host> for EntityId {
    fn from(h: Host) -> Self {
        match h {
            Host::Vehicle(v) => EntityId::Vehicle(v),
            Host::Rsu(r) => EntityId::Rsu(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeServer {
    pub id: ServerId,
    pub host: Host,
    /// cycles/s
    pub capacity: f64,
    /// cycles/s currently allocated
    pub committed: f64,
}

impl EdgeServer {
    pub fn new(id: ServerId, host: Host, capacity: f64) -> Self {
        Self {
            id,
            host,
            capacity,
            committed: 0.0,
        }
    }

    pub fn remaining(&self) -> f64 {
        (self.capacity - self.committed).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    /// h = 1
    Deterministic,
    /// Unit-mean exponential power gain (Rayleigh amplitude).
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub bandwidth_hz: f64,
    pub ref_gain: f64,
    pub path_loss_exp: f64,
    pub noise_power_w: f64,
    pub fading: Fading,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            ref_gain: 1e-3,
            path_loss_exp: 3.0,
            noise_power_w: 1e-13,
            fading: Fading::Deterministic,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("ref_gain", self.ref_gain),
            ("path_loss_exp", self.path_loss_exp),
            ("noise_power_w", self.noise_power_w),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("channel {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `B log2(1 + P h k0 d^-theta / noise)` in bit/s.
pub fn transmission_rate(tx_power_w: f64, distance_m: f64, gain: f64, params: &ChannelParams) -> Result<f64> {
    params.validate()?;
    if !(tx_power_w.is_finite() && tx_power_w > 0.0) {
        return Err(Error::InvalidParameter(format!("transmit power must be positive, got {tx_power_w}")));
    }
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(Error::InvalidParameter(format!("fading gain must be non-negative, got {gain}")));
    }
    let d = if distance_m < MIN_DISTANCE_M {
        log::warn!("link distance {distance_m} m clamped to {MIN_DISTANCE_M} m");
        MIN_DISTANCE_M
    } else {
        distance_m
    };
    let snr = tx_power_w * gain * params.ref_gain * d.powf(-params.path_loss_exp) / params.noise_power_w;
    Ok(params.bandwidth_hz * (1.0 + snr).log2())
}

/// Per-(tx, rx, step) fading draws. Each gain is derived from its key alone,
/// so the order in which links are queried never changes the values.
#[derive(Debug, Clone)]
pub struct FadingGains {
    seed: u64,
    model: Fading,
    step: u64,
    cache: HashMap<(u64, u64), f64>,
}

impl FadingGains {
    pub fn new(seed: u64, model: Fading) -> Self {
        Self {
            seed,
            model,
            step: 0,
            cache: HashMap::new(),
        }
    }

    pub fn gain(&mut self, tx: EntityId, rx: EntityId, step: u64) -> f64 {
        if self.model == Fading::Deterministic {
            return 1.0;
        }
        if step != self.step {
            self.cache.clear();
            self.step = step;
        }
        let seed = self.seed;
        *self.cache.entry((tx.key(), rx.key())).or_insert_with(|| {
            let mut r = rng::stream(seed, "fading", &[tx.key(), rx.key(), step]);
            let u: f64 = r.gen();
            -(1.0 - u).ln()
        })
    }
}

/// Static description of all nodes. Vehicle positions are linear in time;
/// when `wrap_length` is set, road positions re-enter at x = 0.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub vehicles: Vec<VehicleState>,
    pub rsus: Vec<RoadsideUnit>,
    pub servers: Vec<EdgeServer>,
    pub wrap_length: Option<f64>,
}

impl Scene {
    pub fn vehicle(&self, id: VehicleId) -> Result<&VehicleState> {
        self.vehicles
            .get(id.0 as usize)
            .filter(|v| v.id == id)
            .or_else(|| self.vehicles.iter().find(|v| v.id == id))
            .ok_or_else(|| Error::NotFound(format!("vehicle {}", id.0)))
    }

    pub fn rsu(&self, id: RsuId) -> Result<&RoadsideUnit> {
        self.rsus
            .iter()
            .find(|r| r.id == id)
            .ok_or_else(|| Error::NotFound(format!("roadside unit {}", id.0)))
    }

    pub fn server(&self, id: ServerId) -> Result<&EdgeServer> {
        self.servers
            .get(id.0 as usize)
            .filter(|s| s.id == id)
            .or_else(|| self.servers.iter().find(|s| s.id == id))
            .ok_or_else(|| Error::NotFound(format!("edge server {}", id.0)))
    }

    /// Unwrapped position at step `step`: `x0 + speed * step * dt` for vehicles.
    pub fn position_at(&self, entity: EntityId, step: u64, dt: f64) -> Result<Position> {
        match entity {
            EntityId::Vehicle(id) => {
                let v = self.vehicle(id)?;
                Ok(Position {
                    x: v.position.x + v.speed * step as f64 * dt,
                    ..v.position
                })
            }
            EntityId::Rsu(id) => Ok(self.rsu(id)?.position),
        }
    }

    /// Position on the road, wrapped when the road is a loop.
    pub fn road_position(&self, entity: EntityId, step: u64, dt: f64) -> Result<Position> {
        let mut p = self.position_at(entity, step, dt)?;
        if let Some(len) = self.wrap_length {
            p.x = p.x.rem_euclid(len);
        }
        Ok(p)
    }

    pub fn transmit_power(&self, entity: EntityId) -> Result<f64> {
        match entity {
            EntityId::Vehicle(id) => Ok(self.vehicle(id)?.transmit_power),
            EntityId::Rsu(id) => Ok(self.rsu(id)?.transmit_power),
        }
    }

    /// Uplink (vehicle to server) and downlink (server to vehicle) rates at `step`.
    pub fn link_rates(
        &self,
        vehicle: VehicleId,
        server: ServerId,
        step: u64,
        dt: f64,
        params: &ChannelParams,
        fading: &mut FadingGains,
    ) -> Result<(f64, f64)> {
        let v = EntityId::Vehicle(vehicle);
        let s: EntityId = self.server(server)?.host.into();
        let d = distance(self.road_position(v, step, dt)?, self.road_position(s, step, dt)?);
        let up = transmission_rate(self.transmit_power(v)?, d, fading.gain(v, s, step), params)?;
        let down = transmission_rate(self.transmit_power(s)?, d, fading.gain(s, v, step), params)?;
        Ok((up, down))
    }
}
