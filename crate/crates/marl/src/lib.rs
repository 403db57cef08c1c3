//! Actor-critic student agents that distill a teacher's demonstrations
//! through a KL regulariser and then keep learning on their own.

pub mod agent;
pub mod buffer;
pub mod checkpoint;
pub mod eval;
pub mod log;
pub mod loss;
pub mod mlp;
pub mod optim;
pub mod policy;
pub mod seeds;
pub mod trainer;

pub use agent::StudentAgent;
pub use buffer::{AnnealSchedule, ExpertBuffer, Transition};
pub use checkpoint::Checkpoint;
pub use eval::{imitation_rate, run_greedy_episode, summarize, summarize_agent, AgentMetrics, AgentSummary, EpisodeMetrics, EpisodeTracker, EvalSummary};
pub use log::LogRow;
pub use mlp::{Architecture, Mlp};
pub use trainer::{CriticInput, RolloutPolicy, TrainConfig, Trainer};

pub type Mlp64 = Mlp<f64>;
pub type Mlp32 = Mlp<f32>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarlError {
    #[error("input has {got} features, network expects {expected}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error("no agents to act")]
    NoAgents,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Env(#[from] ldpd_core::sim::EnvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
