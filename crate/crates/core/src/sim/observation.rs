//! Per-agent observation matrix: ego row plus nearest neighbours.

use super::config::ObservationParams;
use super::road::RoadNetwork;
use super::vehicle::VehicleState;
use serde::{Deserialize, Serialize};

/// `rows × 6` matrix, row-major. Columns are `[x, y, vx, vy, cos φ, sin φ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationMatrix {
    pub rows: usize,
    pub data: Vec<f64>,
}

impl ObservationMatrix {
    pub const COLS: usize = ObservationParams::FEATURES;

    pub fn zeros(rows: usize) -> Self {
        Self { rows, data: vec![0.0; rows * Self::COLS] }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * Self::COLS..(r + 1) * Self::COLS]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn norm(v: f64, range: f64) -> f64 {
    (v / range).clamp(-1.0, 1.0)
}

/// Builds the observation for `ego` given every vehicle on the road. The ego
/// row is absolute; neighbour rows are relative to the ego and sorted by
/// Euclidean distance (ties by id). Missing rows stay zero.
pub fn build_observation(
    ego: &VehicleState,
    vehicles: &[VehicleState],
    road: &RoadNetwork,
    p: &ObservationParams,
) -> ObservationMatrix {
    let mut m = ObservationMatrix::zeros(p.rows);
    if p.rows == 0 {
        return m;
    }
    let (ylo, yhi) = road.lateral_bounds();
    let y_mid = (ylo + yhi) / 2.0;
    let y_half = ((yhi - ylo) / 2.0).max(1e-9);
    let ego_row = [
        (2.0 * ego.x / road.x_max - 1.0).clamp(-1.0, 1.0),
        ((ego.y - y_mid) / y_half).clamp(-1.0, 1.0),
        norm(ego.vx, p.v_range),
        norm(ego.vy, p.v_range),
        ego.heading.cos(),
        ego.heading.sin(),
    ];
    m.data[..6].copy_from_slice(&ego_row);

    let mut others: Vec<(f64, &VehicleState)> = vehicles
        .iter()
        .filter(|v| v.id != ego.id && v.on_road())
        .map(|v| ((v.x - ego.x).hypot(v.y - ego.y), v))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    for (r, (_, v)) in others.into_iter().take(p.rows - 1).enumerate() {
        let row = [
            norm(v.x - ego.x, p.x_range),
            norm(v.y - ego.y, p.y_range),
            norm(v.vx - ego.vx, p.v_range),
            norm(v.vy - ego.vy, p.v_range),
            v.heading.cos(),
            v.heading.sin(),
        ];
        let off = (r + 1) * 6;
        m.data[off..off + 6].copy_from_slice(&row);
    }
    m
}
