//! Multi-agent ramp-merge environment.

use super::action::Action;
use super::config::EnvConfig;
use super::geometry::{rects_overlap, OrientedRect};
use super::models::{idm_acceleration, mobil_decide, LaneChange};
use super::observation::{build_observation, ObservationMatrix};
use super::pet::ZoneEvent;
use super::reward::{reward_terms, RewardInput, RewardTerms};
use super::road::{RoadError, RoadNetwork};
use super::traffic;
use super::vehicle::{Status, VehicleId, VehicleKind, VehicleState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub type JointAction = BTreeMap<VehicleId, Action>;
pub type Observations = BTreeMap<VehicleId, ObservationMatrix>;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Road(#[from] RoadError),
    #[error("could not place vehicles with the spacing constraint after {0} attempts")]
    InfeasibleSpawn(u32),
    #[error("action given for unknown vehicle {0:?}")]
    UnknownVehicle(VehicleId),
    #[error("action given for vehicle {0:?} which is not a live CAV")]
    NotLive(VehicleId),
    #[error("no action for live CAV {0:?}")]
    MissingAction(VehicleId),
    #[error("episode already finished")]
    EpisodeDone,
}

/// A collision between two vehicles, or between a vehicle and the end of
/// the acceleration lane (`other == None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub vehicle: VehicleId,
    pub other: Option<VehicleId>,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub time: f64,
    pub substeps: u64,
    pub vehicles: Vec<VehicleState>,
    pub collisions: Vec<CollisionEvent>,
    pub zone_events: Vec<ZoneEvent>,
    pub done: bool,
}

impl EnvState {
    pub fn vehicle(&self, id: VehicleId) -> Option<&VehicleState> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    /// All CAV ids in ascending order, live or not.
    pub fn cav_ids(&self) -> Vec<VehicleId> {
        self.vehicles.iter().filter(|v| v.is_cav()).map(|v| v.id).collect()
    }

    pub fn live_cavs(&self) -> Vec<VehicleId> {
        self.vehicles.iter().filter(|v| v.is_cav() && v.is_active()).map(|v| v.id).collect()
    }

    /// Per-CAV done flags.
    pub fn cav_done(&self) -> BTreeMap<VehicleId, bool> {
        self.vehicles.iter().filter(|v| v.is_cav()).map(|v| (v.id, !v.is_active())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepInfo {
    pub crashed: Vec<VehicleId>,
    pub exited: Vec<VehicleId>,
    pub reward_terms: BTreeMap<VehicleId, RewardTerms>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observations: Observations,
    pub rewards: BTreeMap<VehicleId, f64>,
    /// Done flag of every CAV that was live when the step started.
    pub dones: BTreeMap<VehicleId, bool>,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Env {
    config: EnvConfig,
    road: RoadNetwork,
    state: EnvState,
}

fn sub_seed(seed: u64, attempt: u32) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(attempt as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Env {
    /// Spawns a fresh episode. Identical `(config, seed)` give bit-identical
    /// states.
    pub fn reset(config: EnvConfig, seed: u64) -> Result<(Self, Observations), EnvError> {
        let road = RoadNetwork::with_geometry(config.scenario_id, &config.geometry)?;
        let mut attempt = 0;
        let vehicles = loop {
            if attempt >= config.spawn.max_attempts {
                return Err(EnvError::InfeasibleSpawn(attempt));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, attempt));
            if let Some(v) = spawn(&config, &road, &mut rng) {
                break v;
            }
            attempt += 1;
        };
        let env = Self::from_parts(config, road, vehicles);
        let obs = env.observations();
        Ok((env, obs))
    }

    fn from_parts(config: EnvConfig, road: RoadNetwork, vehicles: Vec<VehicleState>) -> Self {
        let mut env = Self {
            config,
            road,
            state: EnvState {
                time: 0.0,
                substeps: 0,
                vehicles,
                collisions: Vec::new(),
                zone_events: Vec::new(),
                done: false,
            },
        };
        env.update_zone_events();
        env
    }

    /// Rebuilds an environment from an explicit state.
    pub fn from_state(config: EnvConfig, state: EnvState) -> Result<Self, EnvError> {
        let road = RoadNetwork::with_geometry(config.scenario_id, &config.geometry)?;
        Ok(Self { config, road, state })
    }

    /// Environment holding exactly `vehicles` at time zero; used by tests and
    /// by scene import.
    pub fn with_vehicles(config: EnvConfig, vehicles: Vec<VehicleState>) -> Result<Self, EnvError> {
        let road = RoadNetwork::with_geometry(config.scenario_id, &config.geometry)?;
        Ok(Self::from_parts(config, road, vehicles))
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn road(&self) -> &RoadNetwork {
        &self.road
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn into_state(self) -> EnvState {
        self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.done
    }

    pub fn observe(&self, cav: VehicleId) -> Result<ObservationMatrix, EnvError> {
        let ego = self
            .state
            .vehicle(cav)
            .filter(|v| v.is_cav())
            .ok_or(EnvError::UnknownVehicle(cav))?;
        Ok(build_observation(ego, &self.state.vehicles, &self.road, &self.config.observation))
    }

    /// Observations of all live CAVs.
    pub fn observations(&self) -> Observations {
        self.state
            .live_cavs()
            .into_iter()
            .map(|id| (id, self.observe(id).expect("live cav")))
            .collect()
    }

    /// Discrete actions that change something for `cav` right now.
    pub fn available_actions(&self, cav: VehicleId) -> Vec<Action> {
        let Some(v) = self.state.vehicle(cav) else { return Vec::new() };
        available_actions(v, &self.road)
    }

    /// One decision period. Returns per-CAV rewards for every CAV that was
    /// live at the start of the step.
    pub fn step(&mut self, joint: &JointAction) -> Result<StepOutcome, EnvError> {
        let live = self.state.live_cavs();
        let (crashed, exited) = self.advance(joint)?;
        let mut rewards = BTreeMap::new();
        let mut terms = BTreeMap::new();
        let mut dones = BTreeMap::new();
        for id in &live {
            let t = self.reward_terms_for(*id, crashed.contains(id));
            rewards.insert(*id, t.weighted(&self.config.reward.weights));
            terms.insert(*id, t);
            dones.insert(*id, !self.state.vehicle(*id).map(|v| v.is_active()).unwrap_or(false));
        }
        let observations = live
            .iter()
            .map(|&id| (id, self.observe(id).expect("known cav")))
            .collect();
        Ok(StepOutcome {
            observations,
            rewards,
            dones,
            done: self.state.done,
            info: StepInfo { crashed, exited, reward_terms: terms },
        })
    }

    fn reward_terms_for(&self, id: VehicleId, crashed: bool) -> RewardTerms {
        let v = self.state.vehicle(id).expect("known vehicle");
        let gap = if v.on_road() {
            traffic::leader(v, &self.state.vehicles, v.lane, &self.road).map(|(_, g)| g)
        } else {
            None
        };
        let input = RewardInput {
            crashed_this_step: crashed,
            speed: v.speed(),
            headway_gap: gap,
            on_ramp: v.on_road() && self.road.is_ramp(v.lane),
            x: v.x,
            merge_start: self.road.merge_start,
            merge_end: self.road.merge_end,
        };
        reward_terms(&input, &self.config.reward)
    }

    fn validate(&self, joint: &JointAction) -> Result<(), EnvError> {
        for id in joint.keys() {
            match self.state.vehicle(*id) {
                None => return Err(EnvError::UnknownVehicle(*id)),
                Some(v) if v.kind != VehicleKind::Cav => return Err(EnvError::UnknownVehicle(*id)),
                Some(v) if !v.is_active() => return Err(EnvError::NotLive(*id)),
                _ => {}
            }
        }
        for id in self.state.live_cavs() {
            if !joint.contains_key(&id) {
                return Err(EnvError::MissingAction(id));
            }
        }
        Ok(())
    }

    /// Simulates one decision period without computing rewards or
    /// observations. Returns the vehicles that crashed and exited.
    pub fn advance(&mut self, joint: &JointAction) -> Result<(Vec<VehicleId>, Vec<VehicleId>), EnvError> {
        if self.state.done {
            return Err(EnvError::EpisodeDone);
        }
        self.validate(joint)?;
        for (id, action) in joint {
            let idx = self.index_of(*id);
            apply_action(&mut self.state.vehicles[idx], *action, &self.road, &self.config);
        }
        self.human_lane_decisions();

        let mut crashed = Vec::new();
        let mut exited = Vec::new();
        for _ in 0..self.config.substeps {
            self.substep(&mut crashed, &mut exited);
        }
        let cavs_finished = self.state.vehicles.iter().filter(|v| v.is_cav()).all(|v| !v.is_active());
        if cavs_finished || self.state.time >= self.config.time_limit - 1e-9 {
            self.finish();
        }
        Ok((crashed, exited))
    }

    fn index_of(&self, id: VehicleId) -> usize {
        self.state.vehicles.iter().position(|v| v.id == id).expect("validated id")
    }

    fn human_lane_decisions(&mut self) {
        let snapshot = self.state.vehicles.clone();
        for v in self.state.vehicles.iter_mut() {
            if v.kind != VehicleKind::Hv || !v.is_active() || v.lane != v.target_lane {
                continue;
            }
            let scene = traffic::mobil_scene(v, &snapshot, &self.road);
            match mobil_decide(&scene, &self.config.mobil, &self.config.idm) {
                LaneChange::Stay => {}
                LaneChange::Left => v.target_lane = self.road.left_of(v.lane).unwrap_or(v.lane),
                LaneChange::Right => v.target_lane = self.road.right_of(v.lane).unwrap_or(v.lane),
            }
        }
    }

    fn substep(&mut self, crashed: &mut Vec<VehicleId>, exited: &mut Vec<VehicleId>) {
        let dt = self.config.dt;
        let snapshot = &self.state.vehicles;
        let controls: Vec<Option<(f64, f64)>> = snapshot
            .iter()
            .map(|v| v.is_active().then(|| control(v, snapshot, &self.road, &self.config)))
            .collect();
        for (v, c) in self.state.vehicles.iter_mut().zip(controls) {
            if let Some((accel, heading_rate)) = c {
                integrate(v, accel, heading_rate, dt, &self.config);
            }
        }
        self.state.substeps += 1;
        self.state.time = self.state.substeps as f64 * dt;
        let time = self.state.time;

        for v in self.state.vehicles.iter_mut().filter(|v| v.is_active()) {
            let near = self.road.lane_at(v.x, v.y);
            if near == v.target_lane || near == v.lane {
                v.lane = near;
            }
            if v.x > self.road.x_max {
                v.status = Status::Exited;
                exited.push(v.id);
            } else if self.road.is_ramp(v.lane) && v.front() >= self.road.merge_end {
                crash(v);
                crashed.push(v.id);
                self.state.collisions.push(CollisionEvent { vehicle: v.id, other: None, time });
            }
        }

        let n = self.state.vehicles.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&self.state.vehicles[i], &self.state.vehicles[j]);
                if !a.on_road() || !b.on_road() || (!a.is_active() && !b.is_active()) {
                    continue;
                }
                if rects_overlap(&rect(a), &rect(b)) {
                    let (ia, ib) = (a.id, b.id);
                    self.state.collisions.push(CollisionEvent { vehicle: ia, other: Some(ib), time });
                    for k in [i, j] {
                        let v = &mut self.state.vehicles[k];
                        if v.is_active() {
                            crash(v);
                            crashed.push(v.id);
                        }
                    }
                }
            }
        }
        self.update_zone_events();
    }

    fn update_zone_events(&mut self) {
        let time = self.state.time;
        for v in &self.state.vehicles {
            let inside = v.is_active() && self.road.in_conflict_zone(v.lane, v.x);
            let open = self
                .state
                .zone_events
                .iter_mut()
                .rev()
                .find(|e| e.vehicle == v.id && e.exit.is_none());
            match (inside, open) {
                (true, None) => self.state.zone_events.push(ZoneEvent { vehicle: v.id, enter: time, exit: None }),
                (false, Some(e)) => e.exit = Some(time),
                _ => {}
            }
        }
    }

    fn finish(&mut self) {
        self.state.done = true;
        let time = self.state.time;
        for e in self.state.zone_events.iter_mut().filter(|e| e.exit.is_none()) {
            e.exit = Some(time);
        }
    }
}

fn crash(v: &mut VehicleState) {
    v.status = Status::Crashed;
    v.vx = 0.0;
    v.vy = 0.0;
}

pub(crate) fn rect(v: &VehicleState) -> OrientedRect<f64> {
    OrientedRect { cx: v.x, cy: v.y, length: v.length, width: v.width, heading: v.heading }
}

pub fn available_actions(v: &VehicleState, road: &RoadNetwork) -> Vec<Action> {
    if !v.is_active() {
        return Vec::new();
    }
    let mut out = vec![Action::SlowDown, Action::Cruise, Action::SpeedUp];
    if road.left_of(v.lane).is_some() {
        out.push(Action::ChangeLeft);
    }
    if road.right_of(v.lane).is_some() {
        out.push(Action::ChangeRight);
    }
    out
}

/// Applies a high-level decision to a CAV's setpoints. Lane changes toward a
/// lane that does not exist fall back to Cruise.
pub fn apply_action(v: &mut VehicleState, action: Action, road: &RoadNetwork, cfg: &EnvConfig) {
    let c = &cfg.controller;
    match action {
        Action::SlowDown => v.target_speed = (v.target_speed - c.speed_step).clamp(0.0, c.v_max),
        Action::SpeedUp => v.target_speed = (v.target_speed + c.speed_step).clamp(0.0, c.v_max),
        Action::Cruise => {}
        Action::ChangeLeft => {
            if let Some(l) = road.left_of(v.lane) {
                v.target_lane = l;
            }
        }
        Action::ChangeRight => {
            if let Some(l) = road.right_of(v.lane) {
                v.target_lane = l;
            }
        }
    }
}

/// Longitudinal acceleration and heading rate for one sub-step.
fn control(v: &VehicleState, vehicles: &[VehicleState], road: &RoadNetwork, cfg: &EnvConfig) -> (f64, f64) {
    let c = &cfg.controller;
    let speed = v.speed();
    let accel = match v.kind {
        VehicleKind::Cav => (c.k_speed * (v.target_speed - speed)).clamp(-c.a_max, c.a_max),
        VehicleKind::Hv => {
            let here = idm_acceleration(speed, traffic::lane_leader_constraint(v, vehicles, v.lane, road), &cfg.idm);
            if v.target_lane != v.lane && road.transition_open(v.lane, v.target_lane, v.x) {
                let there = idm_acceleration(
                    speed,
                    traffic::lane_leader_constraint(v, vehicles, v.target_lane, road),
                    &cfg.idm,
                );
                here.min(there)
            } else {
                here
            }
        }
    };
    let lane_for_steering = if road.transition_open(v.lane, v.target_lane, v.x) { v.target_lane } else { v.lane };
    let target_y = road.lane(lane_for_steering).map(|l| l.center_y).unwrap_or(v.y);
    let lateral_cmd = c.k_lateral * (target_y - v.y);
    let heading_ref = (lateral_cmd / speed.max(1.0)).clamp(-1.0, 1.0).asin().clamp(-c.max_heading, c.max_heading);
    (accel, c.k_heading * (heading_ref - v.heading))
}

fn integrate(v: &mut VehicleState, accel: f64, heading_rate: f64, dt: f64, cfg: &EnvConfig) {
    let speed = (v.speed() + accel * dt).clamp(0.0, cfg.controller.v_max);
    v.heading += heading_rate * dt;
    let (s, c) = v.heading.sin_cos();
    v.vx = speed * c;
    v.vy = speed * s;
    v.x += v.vx * dt;
    v.y += v.vy * dt;
}

fn spawn(cfg: &EnvConfig, road: &RoadNetwork, rng: &mut ChaCha8Rng) -> Option<Vec<VehicleState>> {
    let sp = &cfg.spawn;
    let (lo, hi) = cfg.density.vehicle_range();
    let n = rng.random_range(lo..=hi);
    let mut kinds: Vec<VehicleKind> = (0..n)
        .map(|_| if rng.random_bool(sp.cav_fraction) { VehicleKind::Cav } else { VehicleKind::Hv })
        .collect();
    if !kinds.contains(&VehicleKind::Cav) {
        let k = rng.random_range(0..n);
        kinds[k] = VehicleKind::Cav;
    }
    let through: Vec<_> = road.through_lanes().map(|l| l.id).collect();
    let mut placed: Vec<VehicleState> = Vec::with_capacity(n);
    for (i, kind) in kinds.into_iter().enumerate() {
        let mut ok = None;
        for _ in 0..20 {
            let on_ramp = rng.random_bool(sp.ramp_fraction);
            let lane = if on_ramp { road.ramp() } else { through[rng.random_range(0..through.len())] };
            let (xr, vr) = if on_ramp { (sp.ramp_x, sp.ramp_speed) } else { (sp.main_x, sp.main_speed) };
            let x = rng.random_range(xr.0..=xr.1);
            let speed = rng.random_range(vr.0..=vr.1);
            if placed.iter().all(|p| p.lane != lane || (p.x - x).abs() >= sp.min_spacing) {
                ok = Some((lane, x, speed));
                break;
            }
        }
        let (lane, x, speed) = ok?;
        let y = road.lane(lane).map(|l| l.center_y).unwrap_or(0.0);
        placed.push(VehicleState::new(VehicleId(i as u32 + 1), kind, x, y, speed, lane));
    }
    Some(placed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::Density;
    use crate::sim::road::LaneId;

    fn cfg() -> EnvConfig {
        EnvConfig::new(1, Density::Easy)
    }

    fn cav(id: u32, x: f64, lane: LaneId, speed: f64, road: &RoadNetwork) -> VehicleState {
        let y = road.lane(lane).unwrap().center_y;
        VehicleState::new(VehicleId(id), VehicleKind::Cav, x, y, speed, lane)
    }

    #[test]
    fn reset_is_deterministic() {
        let (a, oa) = Env::reset(cfg(), 42).unwrap();
        let (b, ob) = Env::reset(cfg(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(oa, ob);
    }

    #[test]
    fn vehicle_counts_by_density() {
        for (d, lo, hi) in [(Density::Easy, 2, 4), (Density::Medium, 4, 6), (Density::Hard, 6, 8)] {
            for seed in 0..50 {
                let (env, _) = Env::reset(EnvConfig::new(2, d), seed).unwrap();
                let n = env.state().vehicles.len();
                assert!((lo..=hi).contains(&n), "{d} seed {seed}: {n}");
                assert!(!env.state().live_cavs().is_empty());
            }
        }
    }

    #[test]
    fn spawn_respects_spacing_and_speeds() {
        for seed in 0..50 {
            let (env, _) = Env::reset(EnvConfig::new(1, Density::Hard), seed).unwrap();
            let vs = &env.state().vehicles;
            for a in vs {
                let (lo, hi) = if env.road().is_ramp(a.lane) { (15.0, 22.0) } else { (22.0, 28.0) };
                assert!(a.speed() >= lo && a.speed() <= hi);
                for b in vs {
                    if a.id != b.id && a.lane == b.lane {
                        assert!((a.x - b.x).abs() >= 15.0);
                    }
                }
            }
        }
    }

    #[test]
    fn infeasible_spawn_errors() {
        let mut c = EnvConfig::new(1, Density::Hard);
        c.spawn.min_spacing = 1000.0;
        c.spawn.max_attempts = 3;
        assert_eq!(Env::reset(c, 1).unwrap_err(), EnvError::InfeasibleSpawn(3));
    }

    #[test]
    fn cruise_on_empty_road_keeps_speed() {
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(cfg(), vec![cav(1, 0.0, LaneId(1), 25.0, &road)]).unwrap();
        for _ in 0..5 {
            env.step(&JointAction::from([(VehicleId(1), Action::Cruise)])).unwrap();
        }
        let v = env.state().vehicle(VehicleId(1)).unwrap();
        assert!((v.speed() - 25.0).abs() < 1e-9);
        assert!((v.x - 125.0).abs() < 1e-6);
    }

    #[test]
    fn speed_up_raises_target_with_clamp() {
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(cfg(), vec![cav(1, 0.0, LaneId(1), 25.0, &road)]).unwrap();
        env.step(&JointAction::from([(VehicleId(1), Action::SpeedUp)])).unwrap();
        assert_eq!(env.state().vehicle(VehicleId(1)).unwrap().target_speed, 30.0);
        env.step(&JointAction::from([(VehicleId(1), Action::SpeedUp)])).unwrap();
        assert_eq!(env.state().vehicle(VehicleId(1)).unwrap().target_speed, 32.0);
    }

    #[test]
    fn speed_controller_hand_stepped() {
        // v' = v + clamp(k (vt - v), ±a) dt, ten times
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(cfg(), vec![cav(1, 0.0, LaneId(1), 20.0, &road)]).unwrap();
        env.step(&JointAction::from([(VehicleId(1), Action::SpeedUp)])).unwrap();
        let mut v = 20.0f64;
        let mut x = 0.0f64;
        for _ in 0..10 {
            let a = (1.0 * (25.0 - v)).clamp(-5.0, 5.0);
            v += a * 0.1;
            x += v * 0.1;
        }
        let s = env.state().vehicle(VehicleId(1)).unwrap();
        assert!((s.speed() - v).abs() < 1e-12);
        assert!((s.x - x).abs() < 1e-9);
    }

    #[test]
    fn collision_freezes_and_finishes() {
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(
            cfg(),
            vec![cav(1, 0.0, LaneId(1), 30.0, &road), cav(2, 10.0, LaneId(1), 0.0, &road)],
        )
        .unwrap();
        let joint = JointAction::from([(VehicleId(1), Action::Cruise), (VehicleId(2), Action::Cruise)]);
        let out = env.step(&joint).unwrap();
        assert!(out.done);
        assert_eq!(out.dones, BTreeMap::from([(VehicleId(1), true), (VehicleId(2), true)]));
        assert_eq!(env.state().collisions.len(), 1);
        assert_eq!(out.info.reward_terms[&VehicleId(1)].collision, -1.0);
        assert!(out.rewards[&VehicleId(1)] <= -200.0 + 9.0);
        assert_eq!(env.step(&JointAction::new()), Err(EnvError::EpisodeDone));
    }

    #[test]
    fn crashed_vehicle_stays_frozen() {
        let road = RoadNetwork::build(1).unwrap();
        let hv = VehicleState::new(VehicleId(3), VehicleKind::Hv, 200.0, 0.0, 20.0, LaneId(1));
        let mut env = Env::with_vehicles(
            cfg(),
            vec![cav(1, 0.0, LaneId(1), 30.0, &road), cav(2, 8.0, LaneId(1), 0.0, &road), hv],
        )
        .unwrap();
        // c1 rear-ends c2; the HV keeps driving so the episode runs on only if a CAV lives
        let joint = JointAction::from([(VehicleId(1), Action::Cruise), (VehicleId(2), Action::Cruise)]);
        env.step(&joint).unwrap();
        let wreck = env.state().vehicle(VehicleId(2)).unwrap().clone();
        assert_eq!(wreck.status, Status::Crashed);
        let mut probe = env.clone();
        probe.state.done = false;
        probe.advance(&JointAction::new()).unwrap();
        assert_eq!(probe.state().vehicle(VehicleId(2)).unwrap(), &wreck);
    }

    #[test]
    fn step_rejects_bad_joint_actions() {
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(
            cfg(),
            vec![cav(1, 0.0, LaneId(1), 25.0, &road), cav(2, 100.0, LaneId(1), 25.0, &road)],
        )
        .unwrap();
        assert_eq!(
            env.step(&JointAction::from([(VehicleId(1), Action::Cruise)])),
            Err(EnvError::MissingAction(VehicleId(2)))
        );
        let mut bad = JointAction::from([(VehicleId(1), Action::Cruise), (VehicleId(2), Action::Cruise)]);
        bad.insert(VehicleId(9), Action::Cruise);
        assert_eq!(env.step(&bad), Err(EnvError::UnknownVehicle(VehicleId(9))));
    }

    #[test]
    fn ramp_vehicle_merges_in_window() {
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(cfg(), vec![cav(1, 150.0, LaneId(0), 20.0, &road)]).unwrap();
        env.step(&JointAction::from([(VehicleId(1), Action::ChangeLeft)])).unwrap();
        // before the window the vehicle holds its lane
        assert!(env.state().vehicle(VehicleId(1)).unwrap().y == -4.0);
        for _ in 0..6 {
            if env.is_done() {
                break;
            }
            env.step(&JointAction::from([(VehicleId(1), Action::Cruise)])).unwrap();
        }
        let v = env.state().vehicle(VehicleId(1)).unwrap();
        assert_eq!(v.lane, LaneId(1));
        assert!(env.state().collisions.is_empty());
        assert!(!env.state().zone_events.is_empty());
    }

    #[test]
    fn ramp_end_is_an_obstacle() {
        let road = RoadNetwork::build(1).unwrap();
        let mut env = Env::with_vehicles(cfg(), vec![cav(1, 295.0, LaneId(0), 20.0, &road)]).unwrap();
        let out = env.step(&JointAction::from([(VehicleId(1), Action::Cruise)])).unwrap();
        assert_eq!(out.info.crashed, vec![VehicleId(1)]);
        assert_eq!(env.state().collisions[0].other, None);
    }
}
