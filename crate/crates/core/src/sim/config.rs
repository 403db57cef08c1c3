use super::models::{IdmParams, MobilParams};
use super::road::RoadGeometry;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Easy,
    Medium,
    Hard,
}

impl Density {
    pub const ALL: [Density; 3] = [Density::Easy, Density::Medium, Density::Hard];

    /// Inclusive range of spawned vehicles (CAVs and HVs together).
    pub fn vehicle_range(self) -> (usize, usize) {
        match self {
            Density::Easy => (2, 4),
            Density::Medium => (4, 6),
            Density::Hard => (6, 8),
        }
    }

    pub fn max_vehicles(self) -> usize {
        self.vehicle_range().1
    }

    pub fn name(self) -> &'static str {
        match self {
            Density::Easy => "easy",
            Density::Medium => "medium",
            Density::Hard => "hard",
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Density {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" | "simple" => Ok(Density::Easy),
            "medium" => Ok(Density::Medium),
            "hard" => Ok(Density::Hard),
            other => Err(format!("unknown density {other:?}")),
        }
    }
}

/// Low-level controller that turns a discrete decision into throttle and
/// steering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Target-speed increment applied by SpeedUp / SlowDown (m/s).
    pub speed_step: f64,
    pub v_max: f64,
    /// Proportional speed gain (1/s).
    pub k_speed: f64,
    /// Longitudinal acceleration bound (m/s²).
    pub a_max: f64,
    /// Lateral position gain (1/s).
    pub k_lateral: f64,
    /// Heading gain (1/s), the derivative part of the steering loop.
    pub k_heading: f64,
    pub max_heading: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            speed_step: 5.0,
            v_max: 32.0,
            k_speed: 1.0,
            a_max: 5.0,
            k_lateral: 1.0,
            k_heading: 5.0,
            max_heading: std::f64::consts::FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnParams {
    pub min_spacing: f64,
    pub main_speed: (f64, f64),
    pub ramp_speed: (f64, f64),
    pub main_x: (f64, f64),
    pub ramp_x: (f64, f64),
    /// Probability that a spawned vehicle is a CAV; at least one CAV is forced.
    pub cav_fraction: f64,
    /// Probability that a spawned vehicle starts on the ramp.
    pub ramp_fraction: f64,
    pub max_attempts: u32,
}

impl Default for SpawnParams {
    fn default() -> Self {
        Self {
            min_spacing: 15.0,
            main_speed: (22.0, 28.0),
            ramp_speed: (15.0, 22.0),
            main_x: (0.0, 200.0),
            ramp_x: (0.0, 150.0),
            cav_fraction: 0.5,
            ramp_fraction: 0.5,
            max_attempts: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub collision: f64,
    pub speed: f64,
    pub headway: f64,
    pub merge: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { collision: 200.0, speed: 1.0, headway: 4.0, merge: 4.0 }
    }
}

impl RewardWeights {
    pub fn total(&self) -> f64 {
        self.collision + self.speed + self.headway + self.merge
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub weights: RewardWeights,
    /// Desired time headway t_h (s).
    pub time_headway: f64,
    /// Speed mapped to r_s = 0.
    pub speed_low: f64,
    /// Speed mapped to r_s = 1.
    pub speed_high: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { weights: RewardWeights::default(), time_headway: 1.2, speed_low: 20.0, speed_high: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationParams {
    pub rows: usize,
    /// Longitudinal range for relative rows (m).
    pub x_range: f64,
    /// Lateral range (m).
    pub y_range: f64,
    /// Velocity range (m/s).
    pub v_range: f64,
}

impl Default for ObservationParams {
    fn default() -> Self {
        Self { rows: 6, x_range: 100.0, y_range: 10.0, v_range: 32.0 }
    }
}

impl ObservationParams {
    pub const FEATURES: usize = 6;

    pub fn dim(&self) -> usize {
        self.rows * Self::FEATURES
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub scenario_id: u8,
    pub density: Density,
    pub geometry: RoadGeometry,
    pub dt: f64,
    pub substeps: u32,
    pub time_limit: f64,
    pub controller: ControllerParams,
    pub idm: IdmParams<f64>,
    pub mobil: MobilParams<f64>,
    pub spawn: SpawnParams,
    pub reward: RewardParams,
    pub observation: ObservationParams,
}

impl EnvConfig {
    pub fn new(scenario_id: u8, density: Density) -> Self {
        Self {
            scenario_id,
            density,
            geometry: RoadGeometry::default(),
            dt: 0.1,
            substeps: 10,
            time_limit: 40.0,
            controller: ControllerParams::default(),
            idm: IdmParams::default(),
            mobil: MobilParams::default(),
            spawn: SpawnParams::default(),
            reward: RewardParams::default(),
            observation: ObservationParams::default(),
        }
    }

    /// Length of one decision period (s).
    pub fn decision_period(&self) -> f64 {
        self.dt * self.substeps as f64
    }
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self::new(1, Density::Easy)
    }
}
