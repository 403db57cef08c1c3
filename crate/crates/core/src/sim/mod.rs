//! Ramp-merge traffic simulator.

pub mod action;
pub mod config;
pub mod env;
pub mod geometry;
pub mod models;
pub mod observation;
pub mod pet;
pub mod reward;
pub mod road;
pub mod snapshot;
pub mod traffic;
pub mod vehicle;

pub use action::{Action, UnknownAction};
pub use config::{Density, EnvConfig, ObservationParams, RewardWeights};
pub use env::{available_actions, CollisionEvent, Env, EnvError, EnvState, JointAction, Observations, StepOutcome};
pub use models::{idm_acceleration, mobil_decide, IdmParams, LaneChange, MobilParams, Neighbor};
pub use observation::{build_observation, ObservationMatrix};
pub use pet::{compute_pet, ZoneEvent};
pub use road::{LaneId, LaneKind, RoadNetwork};
pub use snapshot::{SceneSnapshot, SnapshotError, SCENE_SCHEMA};
pub use vehicle::{Status, VehicleId, VehicleKind, VehicleLabel, VehicleState};
