//! Straight-lane ramp-merge road network.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoadError {
    #[error("unknown scenario id {0} (expected 1 or 2)")]
    UnknownScenario(u8),
    #[error("invalid road geometry: {0}")]
    InvalidGeometry(&'static str),
}

/// Index of a lane inside [`RoadNetwork::lanes`]. Lanes are ordered right to
/// left: the acceleration lane is 0, through lanes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaneId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneKind {
    Through,
    Ramp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: LaneId,
    pub kind: LaneKind,
    /// Centerline lateral offset; +y points to the left.
    pub center_y: f64,
    pub width: f64,
    pub start: f64,
    pub end: f64,
}

/// Tunable dimensions. The defaults resemble a common single-ramp highway
/// merge: 500 m of main road with a 90 m acceleration lane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadGeometry {
    pub x_max: f64,
    pub lane_width: f64,
    pub ramp_start: f64,
    pub merge_start: f64,
    pub merge_end: f64,
}

impl Default for RoadGeometry {
    fn default() -> Self {
        Self {
            x_max: 500.0,
            lane_width: 4.0,
            ramp_start: 0.0,
            merge_start: 220.0,
            merge_end: 310.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub scenario_id: u8,
    pub lanes: Vec<Lane>,
    pub x_max: f64,
    pub merge_start: f64,
    pub merge_end: f64,
    /// Total merge-lane length, ramp origin to the end of the acceleration lane.
    pub merge_lane_length: f64,
}

impl RoadNetwork {
    pub fn build(scenario_id: u8) -> Result<Self, RoadError> {
        Self::with_geometry(scenario_id, &RoadGeometry::default())
    }

    pub fn with_geometry(scenario_id: u8, g: &RoadGeometry) -> Result<Self, RoadError> {
        let through = match scenario_id {
            1 => 1,
            2 => 2,
            other => return Err(RoadError::UnknownScenario(other)),
        };
        if g.lane_width <= 0.0 {
            return Err(RoadError::InvalidGeometry("lane width must be positive"));
        }
        if !(g.ramp_start < g.merge_start && g.merge_start < g.merge_end && g.merge_end <= g.x_max) {
            return Err(RoadError::InvalidGeometry(
                "need ramp_start < merge_start < merge_end <= x_max",
            ));
        }
        let mut lanes = vec![Lane {
            id: LaneId(0),
            kind: LaneKind::Ramp,
            center_y: -g.lane_width,
            width: g.lane_width,
            start: g.ramp_start,
            end: g.merge_end,
        }];
        for k in 0..through {
            lanes.push(Lane {
                id: LaneId(k as u8 + 1),
                kind: LaneKind::Through,
                center_y: k as f64 * g.lane_width,
                width: g.lane_width,
                start: 0.0,
                end: g.x_max,
            });
        }
        Ok(Self {
            scenario_id,
            lanes,
            x_max: g.x_max,
            merge_start: g.merge_start,
            merge_end: g.merge_end,
            merge_lane_length: g.merge_end - g.ramp_start,
        })
    }

    pub fn lane(&self, id: LaneId) -> Option<&Lane> {
        self.lanes.get(id.0 as usize)
    }

    pub fn ramp(&self) -> LaneId {
        LaneId(0)
    }

    pub fn is_ramp(&self, id: LaneId) -> bool {
        matches!(self.lane(id), Some(l) if l.kind == LaneKind::Ramp)
    }

    /// The rightmost through lane, which the ramp feeds into.
    pub fn merge_target(&self) -> LaneId {
        LaneId(1)
    }

    pub fn through_lanes(&self) -> impl Iterator<Item = &Lane> {
        self.lanes.iter().filter(|l| l.kind == LaneKind::Through)
    }

    pub fn left_of(&self, id: LaneId) -> Option<LaneId> {
        let next = LaneId(id.0 + 1);
        self.lane(id)?;
        self.lane(next).map(|l| l.id)
    }

    /// Right neighbour; through lanes never hand traffic back to the ramp.
    pub fn right_of(&self, id: LaneId) -> Option<LaneId> {
        if id.0 <= 1 {
            return None;
        }
        self.lane(LaneId(id.0 - 1)).map(|l| l.id)
    }

    /// Whether a vehicle at `x` may physically move from `from` into `to`.
    pub fn transition_open(&self, from: LaneId, to: LaneId, x: f64) -> bool {
        if from == to {
            return true;
        }
        if self.is_ramp(from) {
            return x >= self.merge_start && x <= self.merge_end;
        }
        !self.is_ramp(to)
    }

    /// Lane whose centerline is closest to `y`, restricted to lanes whose
    /// span contains `x`.
    pub fn lane_at(&self, x: f64, y: f64) -> LaneId {
        self.lanes
            .iter()
            .filter(|l| x >= l.start - 1e-9 && (x <= l.end + 1e-9 || l.kind == LaneKind::Ramp))
            .min_by(|a, b| {
                (a.center_y - y)
                    .abs()
                    .partial_cmp(&(b.center_y - y).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|l| l.id)
            .unwrap_or(self.merge_target())
    }

    pub fn in_conflict_zone(&self, lane: LaneId, x: f64) -> bool {
        lane == self.merge_target() && x >= self.merge_start && x <= self.merge_end
    }

    pub fn lateral_bounds(&self) -> (f64, f64) {
        let lo = self.lanes.iter().map(|l| l.center_y - l.width / 2.0).fold(f64::INFINITY, f64::min);
        let hi = self.lanes.iter().map(|l| l.center_y + l.width / 2.0).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}
