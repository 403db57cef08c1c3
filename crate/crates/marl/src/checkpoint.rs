//! JSON checkpoints holding everything needed to resume training exactly.

use crate::agent::StudentAgent;
use crate::buffer::ExpertBuffer;
use crate::log::LogRow;
use crate::trainer::{TrainConfig, Trainer};
use crate::MarlError;
use ldpd_core::teacher::{Planner, Teacher};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_SCHEMA: &str = "ldpd-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: String,
    pub episode: usize,
    pub config: TrainConfig,
    pub agents: Vec<StudentAgent>,
    /// Empty once the teaching phase is over.
    pub buffers: Vec<ExpertBuffer>,
    pub log: Vec<LogRow>,
}

impl Checkpoint {
    pub fn capture<P>(t: &Trainer<P>) -> Self {
        Self {
            schema: CHECKPOINT_SCHEMA.to_string(),
            episode: t.episode,
            config: t.config.clone(),
            agents: t.agents.clone(),
            buffers: t.buffers.clone(),
            log: t.log.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String, MarlError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, MarlError> {
        let c: Self = serde_json::from_str(s)?;
        if c.schema != CHECKPOINT_SCHEMA {
            return Err(MarlError::Checkpoint(format!("unsupported schema {:?}", c.schema)));
        }
        let (obs, critic) = (c.config.obs_dim(), c.config.critic_dim());
        for a in &c.agents {
            if a.actor.arch.input != obs || a.critic.arch.input != critic {
                return Err(MarlError::Checkpoint("network shapes do not match the configuration".into()));
            }
        }
        Ok(c)
    }

    /// Writes through a temporary file so an interrupted save never leaves a
    /// truncated checkpoint behind.
    pub fn save(&self, path: &Path) -> Result<(), MarlError> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MarlError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn into_trainer<P: Planner>(self, teacher: Option<Teacher<P>>) -> Trainer<P> {
        Trainer {
            config: self.config,
            agents: self.agents,
            buffers: self.buffers,
            episode: self.episode,
            log: self.log,
            teacher,
        }
    }
}
