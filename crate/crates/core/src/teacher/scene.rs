//! Observation enhancement: lane and vehicle relations, intentions, and the
//! natural-language scene description handed to the planner.

use crate::sim::models::idm_acceleration;
use crate::sim::traffic;
use crate::sim::{Action, Env, LaneId, RoadNetwork, VehicleId, VehicleKind, VehicleState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneRelation {
    LaneEgo,
    LaneAdj,
    LaneConf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VehicleRelation {
    #[serde(rename = "veh_f")]
    Front,
    #[serde(rename = "veh_r")]
    Rear,
    #[serde(rename = "veh_s")]
    Surrounding,
    #[serde(rename = "veh_c")]
    Conflict,
}

impl VehicleRelation {
    pub fn tag(self) -> &'static str {
        match self {
            VehicleRelation::Front => "front",
            VehicleRelation::Rear => "rear",
            VehicleRelation::Surrounding => "surrounding",
            VehicleRelation::Conflict => "conflict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intention {
    pub lane: LaneId,
    pub behavior: Action,
}

/// Lateral speed beyond which a lane change is assumed (m/s).
pub const LATERAL_INTENT_THRESHOLD: f64 = 0.3;
/// Acceleration dead band around Cruise (m/s²).
pub const ACCEL_DEAD_BAND: f64 = 0.2;
/// Fraction of the merge lane after which a ramp vehicle intends to merge.
pub const MERGE_INTENT_FRACTION: f64 = 0.5;

/// Rule-based intention from the vehicle state and its predicted
/// acceleration.
pub fn infer_intention(v: &VehicleState, accel: f64, road: &RoadNetwork) -> Intention {
    let ramp_start = road.lane(road.ramp()).map(|l| l.start).unwrap_or(0.0);
    if road.is_ramp(v.lane) && v.x - ramp_start > MERGE_INTENT_FRACTION * road.merge_lane_length {
        return Intention { lane: road.merge_target(), behavior: Action::ChangeLeft };
    }
    if v.vy > LATERAL_INTENT_THRESHOLD {
        return Intention { lane: road.left_of(v.lane).unwrap_or(v.lane), behavior: Action::ChangeLeft };
    }
    if v.vy < -LATERAL_INTENT_THRESHOLD {
        let lane = road.right_of(v.lane).unwrap_or(v.lane);
        return Intention { lane, behavior: Action::ChangeRight };
    }
    let behavior = if accel > ACCEL_DEAD_BAND {
        Action::SpeedUp
    } else if accel < -ACCEL_DEAD_BAND {
        Action::SlowDown
    } else {
        Action::Cruise
    };
    Intention { lane: v.lane, behavior }
}

/// Acceleration a human driver would apply in the vehicle's situation; the
/// behavioural cue the intention rule reads.
pub fn predicted_acceleration(v: &VehicleState, env: &Env) -> f64 {
    let leader = traffic::lane_leader_constraint(v, &env.state().vehicles, v.lane, env.road());
    idm_acceleration(v.speed(), leader, &env.config().idm)
}

pub fn intention_in(env: &Env, v: &VehicleState) -> Intention {
    infer_intention(v, predicted_acceleration(v, env), env.road())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelatedVehicle {
    pub id: VehicleId,
    pub kind: VehicleKind,
    pub relation: VehicleRelation,
    pub lane: LaneId,
    pub x: f64,
    pub speed: f64,
    /// Longitudinal offset from the ego (m, positive ahead).
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescription {
    pub cav: VehicleId,
    pub ego_lane: LaneId,
    pub ego_on_ramp: bool,
    pub ego_x: f64,
    pub ego_speed: f64,
    pub lanes: Vec<(LaneId, LaneRelation)>,
    pub vehicles: Vec<RelatedVehicle>,
    pub intentions: BTreeMap<VehicleId, Intention>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("vehicle {0:?} is not a live CAV")]
pub struct UnknownCav(pub VehicleId);

fn label(id: VehicleId, kind: VehicleKind) -> String {
    crate::sim::VehicleLabel { id, kind }.to_string()
}

fn lane_relations(ego_lane: LaneId, road: &RoadNetwork) -> Vec<(LaneId, LaneRelation)> {
    let mut out = vec![(ego_lane, LaneRelation::LaneEgo)];
    let merge = road.merge_target();
    let ramp = road.ramp();
    for lane in &road.lanes {
        if lane.id == ego_lane {
            continue;
        }
        let conflict = (ego_lane == ramp && lane.id == merge) || (ego_lane == merge && lane.id == ramp);
        let adjacent = (lane.id.0 as i16 - ego_lane.0 as i16).abs() == 1;
        if conflict {
            out.push((lane.id, LaneRelation::LaneConf));
        } else if adjacent {
            out.push((lane.id, LaneRelation::LaneAdj));
        }
    }
    out
}

/// Builds the semantic scene description of `cav`.
pub fn enhance_observation(env: &Env, cav: VehicleId) -> Result<ScenarioDescription, UnknownCav> {
    let state = env.state();
    let road = env.road();
    let ego = state.vehicle(cav).filter(|v| v.is_cav() && v.is_active()).ok_or(UnknownCav(cav))?;
    let lanes = lane_relations(ego.lane, road);
    let conflict_lanes: Vec<LaneId> =
        lanes.iter().filter(|(_, r)| *r == LaneRelation::LaneConf).map(|(l, _)| *l).collect();
    let front = traffic::leader(ego, &state.vehicles, ego.lane, road).map(|(v, _)| v.id);
    let rear = traffic::follower(ego, &state.vehicles, ego.lane, road).map(|(v, _)| v.id);

    let mut vehicles: Vec<RelatedVehicle> = state
        .vehicles
        .iter()
        .filter(|v| v.id != cav && v.on_road())
        .map(|v| {
            let relation = if Some(v.id) == front {
                VehicleRelation::Front
            } else if Some(v.id) == rear {
                VehicleRelation::Rear
            } else if conflict_lanes.contains(&v.lane) && v.x <= road.merge_end && ego.x <= road.merge_end {
                VehicleRelation::Conflict
            } else {
                VehicleRelation::Surrounding
            };
            RelatedVehicle { id: v.id, kind: v.kind, relation, lane: v.lane, x: v.x, speed: v.speed(), offset: v.x - ego.x }
        })
        .collect();
    vehicles.sort_by(|a, b| a.offset.abs().total_cmp(&b.offset.abs()).then(a.id.cmp(&b.id)));

    let intentions = state
        .vehicles
        .iter()
        .filter(|v| v.is_cav() && v.is_active())
        .map(|v| (v.id, intention_in(env, v)))
        .collect();
    let mut desc = ScenarioDescription {
        cav,
        ego_lane: ego.lane,
        ego_on_ramp: road.is_ramp(ego.lane),
        ego_x: ego.x,
        ego_speed: ego.speed(),
        lanes,
        vehicles,
        intentions,
        text: String::new(),
    };
    desc.text = render_description(&desc);
    Ok(desc)
}

fn lane_name(lane: LaneId) -> String {
    if lane.0 == 0 {
        "lane 0 (acceleration lane)".to_string()
    } else {
        format!("lane {}", lane.0)
    }
}

fn lane_list(desc: &ScenarioDescription, rel: LaneRelation) -> String {
    let names: Vec<String> = desc.lanes.iter().filter(|(_, r)| *r == rel).map(|(l, _)| l.0.to_string()).collect();
    if names.is_empty() {
        "none".into()
    } else {
        names.join(", ")
    }
}

/// Deterministic text rendering of the structured fields.
pub fn render_description(desc: &ScenarioDescription) -> String {
    let mut s = String::new();
    let me = label(desc.cav, VehicleKind::Cav);
    let _ = writeln!(
        s,
        "{me} is driving on {} at x = {:.1} m with speed {:.1} m/s.",
        lane_name(desc.ego_lane),
        desc.ego_x,
        desc.ego_speed
    );
    let _ = writeln!(
        s,
        "Lanes: ego lane {}; adjacent lanes: {}; conflict lanes: {}.",
        desc.ego_lane.0,
        lane_list(desc, LaneRelation::LaneAdj),
        lane_list(desc, LaneRelation::LaneConf)
    );
    if desc.vehicles.is_empty() {
        let _ = writeln!(s, "No other vehicles are on the road.");
    }
    for v in &desc.vehicles {
        let where_ = if v.offset >= 0.0 { "ahead" } else { "behind" };
        let _ = writeln!(
            s,
            "- {} ({} vehicle) on lane {} at x = {:.1} m, speed {:.1} m/s, {:.1} m {where_}.",
            label(v.id, v.kind),
            v.relation.tag(),
            v.lane.0,
            v.x,
            v.speed,
            v.offset.abs()
        );
    }
    let intents: Vec<String> = desc
        .intentions
        .iter()
        .map(|(id, i)| format!("{} -> lane {}, {}", label(*id, VehicleKind::Cav), i.lane.0, i.behavior))
        .collect();
    let _ = writeln!(s, "CAV intentions: {}.", intents.join("; "));
    s
}
