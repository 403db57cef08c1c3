//! Held-out evaluation of trained students.

use crate::error::{HarnessError, Result};
use ldpd_core::sim::{Density, EnvConfig};
use ldpd_marl::seeds::{derive_seed, Stream};
use ldpd_marl::{run_greedy_episode, summarize, Checkpoint, EpisodeMetrics, StudentAgent};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Metrics of one trained run under one evaluation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub scenario: u8,
    /// Density the students were trained at.
    pub trained_density: Density,
    /// Density they were evaluated at.
    pub density: Density,
    /// Training seed of the run.
    pub seed: u64,
    pub reward: f64,
    pub collision_rate: f64,
    pub avg_speed: f64,
    pub avg_pet: Option<f64>,
    pub success_rate: f64,
}

/// Seeds of the held-out evaluation episodes.
pub fn eval_episode_seeds(seed: u64, n_episodes: usize) -> Vec<u64> {
    (0..n_episodes as u64).map(|j| derive_seed(seed, Stream::Holdout, j)).collect()
}

/// Greedy episodes on a worker pool; results keep episode order.
pub fn run_episodes(agents: &[StudentAgent], env: &EnvConfig, seeds: &[u64]) -> Result<Vec<EpisodeMetrics>> {
    let expected = env.observation.dim();
    if let Some(a) = agents.iter().find(|a| a.actor.arch.input != expected) {
        return Err(HarnessError::DimMismatch { expected, found: a.actor.arch.input });
    }
    let eps: std::result::Result<Vec<_>, _> = seeds.par_iter().map(|&s| run_greedy_episode(agents, env, s)).collect();
    Ok(eps?)
}

pub fn row_from_episodes(scenario: u8, trained: Density, applied: Density, seed: u64, eps: &[EpisodeMetrics]) -> EvalRow {
    let s = summarize(eps);
    EvalRow {
        scenario,
        trained_density: trained,
        density: applied,
        seed,
        reward: s.reward,
        collision_rate: s.collision_rate,
        avg_speed: s.avg_speed,
        avg_pet: s.avg_pet,
        success_rate: s.success_rate,
    }
}

/// Evaluates the checkpoint's students in `scenario` at `density` over
/// `n_episodes` held-out episodes derived from `seed`.
pub fn evaluate(ckpt: &Checkpoint, scenario: u8, density: Density, n_episodes: usize, seed: u64) -> Result<EvalRow> {
    Ok(evaluate_detailed(ckpt, scenario, density, n_episodes, seed)?.0)
}

pub fn evaluate_detailed(
    ckpt: &Checkpoint,
    scenario: u8,
    density: Density,
    n_episodes: usize,
    seed: u64,
) -> Result<(EvalRow, Vec<EpisodeMetrics>)> {
    if n_episodes == 0 {
        return Err(HarnessError::Config("evaluation needs at least one episode".into()));
    }
    let env = EnvConfig { scenario_id: scenario, density, ..ckpt.config.env.clone() };
    ldpd_core::sim::RoadNetwork::with_geometry(scenario, &env.geometry).map_err(|e| HarnessError::Config(e.to_string()))?;
    let eps = run_episodes(&ckpt.agents, &env, &eval_episode_seeds(seed, n_episodes))?;
    let row = row_from_episodes(scenario, ckpt.config.env.density, density, ckpt.config.seed, &eps);
    Ok((row, eps))
}

/// Evaluation at a density other than the training one, in the training
/// scenario. The row carries both levels.
pub fn cross_validate(ckpt: &Checkpoint, applied: Density, n_episodes: usize, seed: u64) -> Result<EvalRow> {
    evaluate(ckpt, ckpt.config.env.scenario_id, applied, n_episodes, seed)
}
