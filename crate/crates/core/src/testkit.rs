//! Random small scenes around the merge area, shared by property tests and
//! the acceptance suite.

use crate::sim::{Density, Env, EnvConfig, LaneId, VehicleId, VehicleKind, VehicleState};
use rand::Rng;

/// Minimum bumper-to-bumper spacing between generated vehicles in one lane.
pub const MIN_SPACING: f64 = 8.0;

/// Builds a scene of 1..=`max_vehicles` vehicles (at least one CAV) placed
/// on lane centerlines near the acceleration lane, with random speeds and
/// speed targets. Vehicles in the same lane never overlap initially.
pub fn random_scene<R: Rng + ?Sized>(rng: &mut R, scenario_id: u8, max_vehicles: usize) -> Env {
    let mut config = EnvConfig::new(scenario_id, Density::Easy);
    config.time_limit = f64::INFINITY;
    let road = crate::sim::RoadNetwork::with_geometry(scenario_id, &config.geometry).expect("valid scenario");
    let lanes: Vec<LaneId> = road.lanes.iter().map(|l| l.id).collect();
    let n = rng.random_range(1..=max_vehicles.max(1));
    let mut vehicles: Vec<VehicleState> = Vec::with_capacity(n);
    let mut id = 1;
    while vehicles.len() < n {
        let lane = lanes[rng.random_range(0..lanes.len())];
        let x = rng.random_range(road.merge_start - 80.0..road.merge_end - 10.0);
        let clash = vehicles
            .iter()
            .any(|v| v.lane == lane && (v.x - x).abs() < VehicleState::DEFAULT_LENGTH + MIN_SPACING);
        if clash {
            continue;
        }
        let kind = if vehicles.is_empty() || rng.random_bool(0.5) { VehicleKind::Cav } else { VehicleKind::Hv };
        let y = road.lane(lane).expect("lane").center_y;
        let mut v = VehicleState::new(VehicleId(id), kind, x, y, rng.random_range(0.0..30.0), lane);
        v.target_speed = rng.random_range(0.0..30.0f64).round();
        vehicles.push(v);
        id += 1;
    }
    Env::with_vehicles(config, vehicles).expect("valid scene")
}
