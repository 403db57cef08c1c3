//! Lane-occupancy queries shared by the simulator and the teacher.

use super::models::{LaneNeighbors, MobilScene, Neighbor};
use super::road::{LaneId, RoadNetwork};
use super::vehicle::VehicleState;

/// Whether `v` occupies `lane`: it is in it, or is actively steering into it.
pub fn occupies(v: &VehicleState, lane: LaneId, road: &RoadNetwork) -> bool {
    v.on_road()
        && (v.lane == lane || (v.target_lane == lane && road.transition_open(v.lane, lane, v.x)))
}

fn gap_between(rear: &VehicleState, front: &VehicleState) -> f64 {
    front.x - rear.x - (front.length + rear.length) / 2.0
}

fn is_ahead(other: &VehicleState, ego: &VehicleState) -> bool {
    other.x > ego.x || (other.x == ego.x && other.id > ego.id)
}

/// Nearest vehicle ahead of `ego` in `lane`, with its bumper gap.
pub fn leader<'a>(
    ego: &VehicleState,
    vehicles: &'a [VehicleState],
    lane: LaneId,
    road: &RoadNetwork,
) -> Option<(&'a VehicleState, f64)> {
    vehicles
        .iter()
        .filter(|o| o.id != ego.id && occupies(o, lane, road) && is_ahead(o, ego))
        .map(|o| (o, gap_between(ego, o)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Nearest vehicle behind `ego` in `lane`, with its bumper gap.
pub fn follower<'a>(
    ego: &VehicleState,
    vehicles: &'a [VehicleState],
    lane: LaneId,
    road: &RoadNetwork,
) -> Option<(&'a VehicleState, f64)> {
    vehicles
        .iter()
        .filter(|o| o.id != ego.id && occupies(o, lane, road) && !is_ahead(o, ego))
        .map(|o| (o, gap_between(o, ego)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// The end of the acceleration lane acts as a stopped obstacle.
pub fn ramp_end_obstacle(ego: &VehicleState, lane: LaneId, road: &RoadNetwork) -> Option<Neighbor<f64>> {
    road.is_ramp(lane).then(|| Neighbor { gap: road.merge_end - ego.front(), speed: 0.0 })
}

/// Car-following constraint in `lane`: the closer of the vehicle leader
/// and the ramp-end obstacle.
pub fn lane_leader_constraint(
    ego: &VehicleState,
    vehicles: &[VehicleState],
    lane: LaneId,
    road: &RoadNetwork,
) -> Option<Neighbor<f64>> {
    let veh = leader(ego, vehicles, lane, road).map(|(o, gap)| Neighbor { gap, speed: o.speed() });
    let wall = ramp_end_obstacle(ego, lane, road);
    match (veh, wall) {
        (Some(a), Some(b)) => Some(if b.gap < a.gap { b } else { a }),
        (a, b) => a.or(b),
    }
}

pub fn lane_neighbors(
    ego: &VehicleState,
    vehicles: &[VehicleState],
    lane: LaneId,
    road: &RoadNetwork,
) -> LaneNeighbors<f64> {
    LaneNeighbors {
        leader: lane_leader_constraint(ego, vehicles, lane, road),
        follower: follower(ego, vehicles, lane, road).map(|(o, gap)| Neighbor { gap, speed: o.speed() }),
    }
}

/// MOBIL inputs for `ego`; candidate lanes are the neighbours reachable at
/// the ego's current position.
pub fn mobil_scene(ego: &VehicleState, vehicles: &[VehicleState], road: &RoadNetwork) -> MobilScene<f64> {
    let candidate = |lane: Option<LaneId>| {
        lane.filter(|&l| road.transition_open(ego.lane, l, ego.x))
            .map(|l| lane_neighbors(ego, vehicles, l, road))
    };
    MobilScene {
        ego_speed: ego.speed(),
        ego_length: ego.length,
        current: lane_neighbors(ego, vehicles, ego.lane, road),
        left: candidate(road.left_of(ego.lane)),
        right: candidate(road.right_of(ego.lane)),
    }
}
