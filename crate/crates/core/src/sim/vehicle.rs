use super::road::LaneId;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleKind {
    Cav,
    Hv,
}

/// Numeric vehicle id, unique within an episode. Rendered as `c<n>` for
/// CAVs and `h<n>` for human drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    Crashed,
    Exited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: VehicleId,
    pub kind: VehicleKind,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub heading: f64,
    pub lane: LaneId,
    pub length: f64,
    pub width: f64,
    pub target_speed: f64,
    pub target_lane: LaneId,
    pub status: Status,
}

impl VehicleState {
    pub const DEFAULT_LENGTH: f64 = 5.0;
    pub const DEFAULT_WIDTH: f64 = 2.0;

    pub fn new(id: VehicleId, kind: VehicleKind, x: f64, y: f64, speed: f64, lane: LaneId) -> Self {
        Self {
            id,
            kind,
            x,
            y,
            vx: speed,
            vy: 0.0,
            heading: 0.0,
            lane,
            length: Self::DEFAULT_LENGTH,
            width: Self::DEFAULT_WIDTH,
            target_speed: speed,
            target_lane: lane,
            status: Status::Active,
        }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn is_cav(&self) -> bool {
        self.kind == VehicleKind::Cav
    }

    pub fn is_active(&self) -> bool {
        self.status == Status::Active
    }

    /// Still physically on the road (active or a frozen wreck).
    pub fn on_road(&self) -> bool {
        self.status != Status::Exited
    }

    pub fn front(&self) -> f64 {
        self.x + self.length / 2.0
    }

    pub fn label(&self) -> String {
        VehicleLabel { id: self.id, kind: self.kind }.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VehicleLabel {
    pub id: VehicleId,
    pub kind: VehicleKind,
}

impl fmt::Display for VehicleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.kind {
            VehicleKind::Cav => 'c',
            VehicleKind::Hv => 'h',
        };
        write!(f, "{p}{}", self.id.0)
    }
}

impl FromStr for VehicleLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let kind = match s.chars().next() {
            Some('c') | Some('C') => VehicleKind::Cav,
            Some('h') | Some('H') => VehicleKind::Hv,
            _ => return Err(format!("bad vehicle label {s:?}")),
        };
        let n = s[1..].parse::<u32>().map_err(|_| format!("bad vehicle label {s:?}"))?;
        Ok(Self { id: VehicleId(n), kind })
    }
}
