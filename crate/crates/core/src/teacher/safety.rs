//! Safety checker: priority-ordered verification of planned actions and
//! margin-maximising correction.

use super::predict::{predict_trajectories, Trajectories};
use super::priority::PriorityList;
use crate::sim::{available_actions, Action, Env, JointAction, LaneId, RoadNetwork, Status, VehicleId, VehicleState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Planner,
    SafetyCorrected,
}

/// Upper bound on re-verification passes in [`safety_check`].
pub const MAX_PASSES: usize = 4;

/// Position of the virtual obstacle closing the acceleration lane, as seen
/// by a vehicle of the given length.
fn lane_end_position(road: &RoadNetwork, ego_length: f64) -> f64 {
    road.merge_end + ego_length / 2.0
}

fn nearest_abs_offset(frame: &[VehicleState], ego: &VehicleState, lane: LaneId, road: &RoadNetwork) -> f64 {
    let mut best = frame
        .iter()
        .filter(|v| v.id != ego.id && v.on_road() && v.lane == lane)
        .map(|v| (v.x - ego.x).abs())
        .fold(f64::INFINITY, f64::min);
    if road.is_ramp(lane) {
        best = best.min((lane_end_position(road, ego.length) - ego.x).abs());
    }
    best
}

/// Target lane of a lane-change action, if it exists.
pub fn lane_change_target(origin: &VehicleState, action: Action, road: &RoadNetwork) -> Option<LaneId> {
    match action {
        Action::ChangeLeft => road.left_of(origin.lane),
        Action::ChangeRight => road.right_of(origin.lane),
        _ => None,
    }
}

/// Safety margin of `origin` (the ego as it was at decision time) at
/// prediction step `k` under `action`.
///
/// Lane changes use the smallest absolute offset to the nearest vehicle in
/// the target and current lanes; otherwise the gap to the preceding vehicle
/// in the ego's lane. Missing neighbours contribute +∞, the end of the
/// acceleration lane counts as a stopped vehicle, and a predicted crash of
/// the ego pins the margin to 0.
pub fn safety_margin(traj: &Trajectories, origin: &VehicleState, action: Action, k: usize, road: &RoadNetwork) -> f64 {
    let frame = traj.frame(k);
    let Some(ego) = frame.iter().find(|v| v.id == origin.id) else { return f64::INFINITY };
    match ego.status {
        Status::Crashed => return 0.0,
        Status::Exited => return f64::INFINITY,
        Status::Active => {}
    }
    if let Some(target) = lane_change_target(origin, action, road) {
        let to_target = nearest_abs_offset(frame, ego, target, road);
        let to_current = nearest_abs_offset(frame, ego, origin.lane, road);
        return to_target.min(to_current);
    }
    let mut gap = frame
        .iter()
        .filter(|v| v.id != ego.id && v.on_road() && v.lane == ego.lane && v.x > ego.x)
        .map(|v| v.x - ego.x)
        .fold(f64::INFINITY, f64::min);
    if road.is_ramp(ego.lane) {
        gap = gap.min(lane_end_position(road, ego.length) - ego.x);
    }
    gap
}

/// `min_k d_sm,k` over the whole horizon.
pub fn min_margin(traj: &Trajectories, origin: &VehicleState, action: Action, road: &RoadNetwork) -> f64 {
    (1..=traj.horizon()).map(|k| safety_margin(traj, origin, action, k, road)).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub action: Action,
    /// Min-over-horizon margin of every candidate, in index order.
    pub margins: Vec<(Action, f64)>,
}

/// Picks the available action with the largest min-over-horizon margin,
/// re-predicting the scene for each candidate while the other CAVs keep
/// their entries in `base`. Ties go to the lower action index.
pub fn correct_action(env: &Env, cav: VehicleId, available: &[Action], base: &JointAction, horizon: usize) -> Correction {
    let origin = env.state().vehicle(cav).expect("cav in scene").clone();
    let mut candidates = available.to_vec();
    candidates.sort();
    candidates.dedup();
    if candidates.is_empty() {
        candidates.push(Action::SlowDown);
    }
    let mut margins = Vec::with_capacity(candidates.len());
    let mut best: Option<(Action, f64)> = None;
    for a in candidates {
        let mut joint = base.clone();
        joint.insert(cav, a);
        let traj = predict_trajectories(env, &joint, horizon);
        let m = min_margin(&traj, &origin, a, env.road());
        margins.push((a, m));
        if best.map_or(true, |(_, bm)| m > bm) {
            best = Some((a, m));
        }
    }
    Correction { action: best.expect("non-empty candidates").0, margins }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyOutcome {
    pub actions: JointAction,
    pub provenance: BTreeMap<VehicleId, Provenance>,
}

/// Whether `cav` is predicted to crash into anything other than a CAV in
/// `yielding` (lower-priority CAVs are expected to give way).
fn crash_blamed_on(traj: &Trajectories, cav: VehicleId, yielding: &[VehicleId]) -> bool {
    traj.collisions.iter().any(|c| {
        let other = if c.vehicle == cav {
            c.other
        } else if c.other == Some(cav) {
            Some(c.vehicle)
        } else {
            return false;
        };
        !other.is_some_and(|o| yielding.contains(&o))
    })
}

/// Verifies `planned` CAV by CAV in descending priority. A CAV whose action
/// is unavailable, or whose predicted trajectory crashes into anything but a
/// lower-priority CAV, gets the margin-maximising substitute; higher-priority
/// CAVs keep their settled actions and lower-priority ones their current
/// entries. Passes repeat until nothing changes, so the result is a fixed
/// point.
pub fn safety_check(planned: &JointAction, env: &Env, priorities: &PriorityList, horizon: usize) -> SafetyOutcome {
    let live = env.state().live_cavs();
    let mut actions: JointAction = live
        .iter()
        .map(|id| (*id, planned.get(id).copied().unwrap_or(Action::SlowDown)))
        .collect();
    let mut provenance: BTreeMap<VehicleId, Provenance> = live
        .iter()
        .map(|id| (*id, if planned.contains_key(id) { Provenance::Planner } else { Provenance::SafetyCorrected }))
        .collect();
    let mut order: Vec<VehicleId> = priorities.order().filter(|id| live.contains(id)).collect();
    for id in &live {
        if !order.contains(id) {
            order.push(*id);
        }
    }

    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for (rank, &cav) in order.iter().enumerate() {
            let v = env.state().vehicle(cav).expect("live cav");
            let available = available_actions(v, env.road());
            let current = actions[&cav];
            let needs_fix = !available.contains(&current)
                || crash_blamed_on(&predict_trajectories(env, &actions, horizon), cav, &order[rank + 1..]);
            if !needs_fix {
                continue;
            }
            let fix = correct_action(env, cav, &available, &actions, horizon);
            if fix.action != current {
                actions.insert(cav, fix.action);
                provenance.insert(cav, Provenance::SafetyCorrected);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    SafetyOutcome { actions, provenance }
}
