//! Greedy evaluation episodes and the metric suite.

use crate::agent::StudentAgent;
use crate::MarlError;
use ldpd_core::sim::{compute_pet, Env, EnvConfig, JointAction, Status, VehicleId};
use ldpd_core::teacher::{Planner, Teacher};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Agent slot of each CAV: the k-th CAV by id is driven by agent k. CAVs
/// beyond the number of trained agents reuse the last agent.
pub fn slot_of(cavs: &[VehicleId], id: VehicleId, n_agents: usize) -> usize {
    let k = cavs.iter().position(|c| *c == id).expect("cav of this episode");
    k.min(n_agents.saturating_sub(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub seed: u64,
    /// Mean over CAVs of each CAV's undiscounted return.
    pub reward: f64,
    pub collided: bool,
    /// Mean CAV speed over all samples (initial state and after every step).
    pub avg_speed: f64,
    pub pets: Vec<f64>,
    pub success: bool,
    pub steps: usize,
    /// Per agent slot: `(return, crashed, mean speed)` when the slot was used.
    pub agents: Vec<Option<AgentMetrics>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub reward: f64,
    pub crashed: bool,
    pub avg_speed: f64,
}

/// Accumulates metrics while an episode is stepped.
pub struct EpisodeTracker {
    cavs: Vec<VehicleId>,
    returns: Vec<f64>,
    speed_sum: Vec<f64>,
    speed_n: Vec<usize>,
    steps: usize,
}

impl EpisodeTracker {
    pub fn new(env: &Env) -> Self {
        let cavs = env.state().cav_ids();
        let n = cavs.len();
        let mut t = Self { cavs, returns: vec![0.0; n], speed_sum: vec![0.0; n], speed_n: vec![0; n], steps: 0 };
        t.sample_speeds(env, None);
        t
    }

    fn sample_speeds(&mut self, env: &Env, only: Option<&[VehicleId]>) {
        for (i, id) in self.cavs.iter().enumerate() {
            if only.is_some_and(|o| !o.contains(id)) {
                continue;
            }
            let v = env.state().vehicle(*id).expect("cav");
            if v.status != Status::Crashed {
                self.speed_sum[i] += v.speed();
                self.speed_n[i] += 1;
            }
        }
    }

    pub fn record(&mut self, env: &Env, live_before: &[VehicleId], rewards: &std::collections::BTreeMap<VehicleId, f64>) {
        self.steps += 1;
        for (id, r) in rewards {
            let i = self.cavs.iter().position(|c| c == id).expect("cav");
            self.returns[i] += r;
        }
        self.sample_speeds(env, Some(live_before));
    }

    pub fn finish(self, env: &Env, seed: u64, n_agents: usize) -> EpisodeMetrics {
        let st = env.state();
        let road = env.road();
        let collided = !st.collisions.is_empty();
        let crashed = |id: &VehicleId| st.vehicle(*id).is_some_and(|v| v.status == Status::Crashed);
        let cleared = self.cavs.iter().all(|id| {
            let v = st.vehicle(*id).expect("cav");
            v.status == Status::Exited || (v.is_active() && !road.is_ramp(v.lane) && v.x > road.merge_end)
        });
        let n = self.cavs.len().max(1) as f64;
        let total_speed: f64 = self.speed_sum.iter().sum();
        let total_n: usize = self.speed_n.iter().sum();
        let mut agents: Vec<Option<AgentMetrics>> = vec![None; n_agents];
        for (k, id) in self.cavs.iter().enumerate() {
            if k < n_agents {
                agents[k] = Some(AgentMetrics {
                    reward: self.returns[k],
                    crashed: crashed(id),
                    avg_speed: if self.speed_n[k] > 0 { self.speed_sum[k] / self.speed_n[k] as f64 } else { 0.0 },
                });
            }
        }
        EpisodeMetrics {
            seed,
            reward: self.returns.iter().sum::<f64>() / n,
            collided,
            avg_speed: if total_n > 0 { total_speed / total_n as f64 } else { 0.0 },
            pets: compute_pet(&st.zone_events),
            success: !collided && cleared,
            steps: self.steps,
            agents,
        }
    }
}

/// One episode with every CAV driven by the argmax of its agent's policy.
pub fn run_greedy_episode(agents: &[StudentAgent], config: &EnvConfig, seed: u64) -> Result<EpisodeMetrics, MarlError> {
    if agents.is_empty() {
        return Err(MarlError::NoAgents);
    }
    let (mut env, mut obs) = Env::reset(config.clone(), seed)?;
    let cavs = env.state().cav_ids();
    let mut tracker = EpisodeTracker::new(&env);
    while !env.is_done() {
        let live = env.state().live_cavs();
        let mut joint = JointAction::new();
        for id in &live {
            let agent = &agents[slot_of(&cavs, *id, agents.len())];
            joint.insert(*id, agent.greedy(obs[id].as_slice())?);
        }
        let out = env.step(&joint)?;
        tracker.record(&env, &live, &out.rewards);
        obs = out.observations;
    }
    Ok(tracker.finish(&env, seed, agents.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub reward: f64,
    pub collision_rate: f64,
    pub avg_speed: f64,
    /// Mean over every PET pair of every episode; `None` when no pair
    /// crossed the conflict zone.
    pub avg_pet: Option<f64>,
    pub success_rate: f64,
}

pub fn summarize(episodes: &[EpisodeMetrics]) -> EvalSummary {
    let n = episodes.len().max(1) as f64;
    let pets: Vec<f64> = episodes.iter().flat_map(|e| e.pets.iter().copied()).collect();
    EvalSummary {
        episodes: episodes.len(),
        reward: episodes.iter().map(|e| e.reward).sum::<f64>() / n,
        collision_rate: episodes.iter().filter(|e| e.collided).count() as f64 / n,
        avg_speed: episodes.iter().map(|e| e.avg_speed).sum::<f64>() / n,
        avg_pet: (!pets.is_empty()).then(|| pets.iter().sum::<f64>() / pets.len() as f64),
        success_rate: episodes.iter().filter(|e| e.success).count() as f64 / n,
    }
}

/// Per-slot summary over the episodes in which the slot was used.
pub fn summarize_agent(episodes: &[EpisodeMetrics], slot: usize) -> Option<AgentSummary> {
    let used: Vec<AgentMetrics> = episodes.iter().filter_map(|e| e.agents.get(slot).copied().flatten()).collect();
    if used.is_empty() {
        return None;
    }
    let n = used.len() as f64;
    Some(AgentSummary {
        reward: used.iter().map(|a| a.reward).sum::<f64>() / n,
        collision_rate: used.iter().filter(|a| a.crashed).count() as f64 / n,
        avg_speed: used.iter().map(|a| a.avg_speed).sum::<f64>() / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub reward: f64,
    pub collision_rate: f64,
    pub avg_speed: f64,
}

/// Fraction of teacher-driven states on which each student's argmax equals
/// the teacher's action. Returns `(agreements, states)`.
pub fn imitation_rate<P: Planner>(
    agents: &[StudentAgent],
    teacher: &mut Teacher<P>,
    config: &EnvConfig,
    seeds: &[u64],
) -> Result<(usize, usize), MarlError> {
    let (mut hits, mut total) = (0, 0);
    for &seed in seeds {
        let (mut env, mut obs) = Env::reset(config.clone(), seed)?;
        let cavs = env.state().cav_ids();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while !env.is_done() {
            let decision = teacher.decide(&env, &mut rng);
            for (id, a) in &decision.actions {
                let agent = &agents[slot_of(&cavs, *id, agents.len())];
                hits += usize::from(agent.greedy(obs[id].as_slice())? == *a);
                total += 1;
            }
            obs = env.step(&decision.actions)?.observations;
        }
    }
    Ok((hits, total))
}
