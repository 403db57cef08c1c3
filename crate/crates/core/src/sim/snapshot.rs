//! JSON scene snapshots.
//!
//! ```json
//! {
//!   "schema": "ldpd-scene/1",
//!   "config": { "scenario_id": 1, "density": "easy", ... },
//!   "state": {
//!     "time": 3.0, "substeps": 30,
//!     "vehicles": [{ "id": 1, "kind": "cav", "x": 120.0, "y": -4.0, ... }],
//!     "collisions": [{ "vehicle": 2, "other": 3, "time": 2.1 }],
//!     "zone_events": [{ "vehicle": 1, "enter": 1.2, "exit": null }],
//!     "done": false
//!   }
//! }
//! ```

use super::config::EnvConfig;
use super::env::{Env, EnvError, EnvState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCENE_SCHEMA: &str = "ldpd-scene/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub schema: String,
    pub config: EnvConfig,
    pub state: EnvState,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed scene json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported scene schema {0:?}")]
    Schema(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl SceneSnapshot {
    pub fn capture(env: &Env) -> Self {
        Self { schema: SCENE_SCHEMA.to_string(), config: env.config().clone(), state: env.state().clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, SnapshotError> {
        let snap: Self = serde_json::from_str(s)?;
        if snap.schema != SCENE_SCHEMA {
            return Err(SnapshotError::Schema(snap.schema));
        }
        Ok(snap)
    }

    pub fn into_env(self) -> Result<Env, SnapshotError> {
        Ok(Env::from_state(self.config, self.state)?)
    }
}
