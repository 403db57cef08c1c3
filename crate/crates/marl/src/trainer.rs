//! Two-phase training: distillation from the teacher with annealed λ, then
//! plain actor-critic self-learning.

use crate::agent::StudentAgent;
use crate::buffer::{AnnealSchedule, ExpertBuffer, Transition};
use crate::eval::{run_greedy_episode, slot_of, summarize, summarize_agent, EpisodeMetrics};
use crate::log::LogRow;
use crate::loss::{actor_loss, advantage, critic_loss, KlItem, PgItem};
use crate::optim::RmsPropConfig;
use crate::policy::teacher_distribution;
use crate::seeds::{derive_seed, Stream};
use crate::MarlError;
use ldpd_core::sim::{Action, Env, EnvConfig, JointAction, ObservationMatrix, VehicleId};
use ldpd_core::teacher::{safety_check, Planner, PriorityList, Teacher, TeacherConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticInput {
    /// All agents' observations, zero-padded to the agent count.
    Joint,
    /// The agent's own observation.
    Local,
}

/// Which action is executed in the environment while the teacher is
/// consulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutPolicy {
    Teacher,
    Student,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub env: EnvConfig,
    pub seed: u64,
    pub teaching_episodes: usize,
    pub self_episodes: usize,
    pub lambda0: f64,
    pub gamma: f64,
    pub optimizer: RmsPropConfig,
    pub grad_clip: f64,
    pub hidden: Vec<usize>,
    pub smoothing: f64,
    /// Distillation minibatch drawn from the expert buffer per update.
    pub kl_batch: usize,
    /// Extra distillation-only minibatch updates after each step's actor
    /// update while λ > 0.
    pub distill_updates: usize,
    pub buffer_capacity: usize,
    /// Gradient steps on each episode's returns.
    pub critic_epochs: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub critic_input: CriticInput,
    pub rollout: RolloutPolicy,
    /// Route executed student actions through the teacher's safety check.
    pub student_tools: bool,
    /// Multiplier applied to rewards before learning (metrics stay raw).
    pub reward_scale: f64,
    pub teacher: TeacherConfig,
}

impl TrainConfig {
    pub fn new(env: EnvConfig, seed: u64) -> Self {
        Self {
            env,
            seed,
            teaching_episodes: 2000,
            self_episodes: 18000,
            lambda0: 1.0,
            gamma: 0.99,
            optimizer: RmsPropConfig::default(),
            grad_clip: 0.5,
            hidden: vec![64, 64],
            smoothing: 0.05,
            kl_batch: 32,
            distill_updates: 8,
            buffer_capacity: 5000,
            critic_epochs: 8,
            eval_interval: 200,
            eval_episodes: 3,
            critic_input: CriticInput::Joint,
            rollout: RolloutPolicy::Teacher,
            student_tools: false,
            reward_scale: 1.0,
            teacher: TeacherConfig::default(),
        }
    }

    pub fn total_episodes(&self) -> usize {
        self.teaching_episodes + self.self_episodes
    }

    pub fn n_agents(&self) -> usize {
        self.env.density.max_vehicles()
    }

    pub fn obs_dim(&self) -> usize {
        self.env.observation.dim()
    }

    pub fn critic_dim(&self) -> usize {
        match self.critic_input {
            CriticInput::Joint => self.obs_dim() * self.n_agents(),
            CriticInput::Local => self.obs_dim(),
        }
    }

    pub fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule { lambda0: self.lambda0, teaching_episodes: self.teaching_episodes }
    }

    pub fn validate(&self) -> Result<(), MarlError> {
        let bad = |m: &str| Err(MarlError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(0.0..0.5).contains(&self.smoothing) {
            return bad("smoothing must lie in [0, 0.5)");
        }
        if self.lambda0 < 0.0 || !self.lambda0.is_finite() {
            return bad("lambda0 must be a finite non-negative number");
        }
        if self.eval_interval == 0 {
            return bad("eval_interval must be positive");
        }
        Ok(())
    }
}

/// Per-slot record of one episode, consumed by the critic update.
#[derive(Default)]
struct SlotTrace {
    critic_in: Vec<Vec<f64>>,
    rewards: Vec<f64>,
    /// Critic input after the last step when the episode was cut by the
    /// time limit rather than ending for this agent.
    bootstrap: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    pub episode: usize,
    pub lambda: f64,
    pub teacher_consulted: bool,
    pub steps: usize,
    pub corrections: usize,
    pub fallbacks: usize,
}

pub struct Trainer<P> {
    pub config: TrainConfig,
    pub agents: Vec<StudentAgent>,
    pub buffers: Vec<ExpertBuffer>,
    /// Episodes completed so far.
    pub episode: usize,
    pub log: Vec<LogRow>,
    pub teacher: Option<Teacher<P>>,
}

fn joint_input(cavs: &[VehicleId], live: &[(VehicleId, &ObservationMatrix)], n_agents: usize, obs_dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_agents * obs_dim];
    for (id, o) in live {
        let k = slot_of(cavs, *id, n_agents);
        v[k * obs_dim..(k + 1) * obs_dim].copy_from_slice(o.as_slice());
    }
    v
}

impl<P: Planner> Trainer<P> {
    /// Fresh students; `teacher = None` gives the plain actor-critic learner.
    pub fn new(config: TrainConfig, teacher: Option<Teacher<P>>) -> Result<Self, MarlError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, Stream::Init, 0));
        let agents = (0..config.n_agents())
            .map(|_| StudentAgent::new(config.obs_dim(), config.critic_dim(), &config.hidden, config.optimizer, &mut rng))
            .collect();
        let buffers = (0..config.n_agents()).map(|_| ExpertBuffer::new(config.buffer_capacity)).collect();
        Ok(Self { config, agents, buffers, episode: 0, log: Vec::new(), teacher })
    }

    pub fn is_finished(&self) -> bool {
        self.episode >= self.config.total_episodes()
    }

    fn critic_in(&self, joint: &[f64], own: &ObservationMatrix) -> Vec<f64> {
        match self.config.critic_input {
            CriticInput::Joint => joint.to_vec(),
            CriticInput::Local => own.as_slice().to_vec(),
        }
    }

    /// Trains one episode and, at evaluation points, appends to the log.
    pub fn train_episode(&mut self) -> Result<EpisodeReport, MarlError> {
        let e = self.episode;
        let cfg = self.config.clone();
        let teaching = e < cfg.teaching_episodes && self.teacher.is_some();
        let lambda = if teaching { cfg.schedule().lambda(e) } else { 0.0 };
        let idx = e as u64;
        let mut policy_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, Stream::Policy, idx));
        let mut teacher_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, Stream::Teacher, idx));
        let mut buffer_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, Stream::Buffer, idx));
        let (mut env, mut obs) = Env::reset(cfg.env.clone(), derive_seed(cfg.seed, Stream::Env, idx))?;
        let cavs = env.state().cav_ids();
        let n_agents = self.agents.len();
        let obs_dim = cfg.obs_dim();
        let mut traces: Vec<SlotTrace> = (0..n_agents).map(|_| SlotTrace::default()).collect();
        let (mut steps, mut corrections, mut fallbacks) = (0, 0, 0);

        while !env.is_done() {
            let live = env.state().live_cavs();
            let live_obs: Vec<(VehicleId, &ObservationMatrix)> = live.iter().map(|id| (*id, &obs[id])).collect();
            let joint = joint_input(&cavs, &live_obs, n_agents, obs_dim);

            let mut student = JointAction::new();
            for id in &live {
                let k = slot_of(&cavs, *id, n_agents);
                student.insert(*id, self.agents[k].sample(obs[id].as_slice(), &mut policy_rng)?);
            }
            let expert = if teaching {
                let t = self.teacher.as_mut().expect("teaching implies a teacher");
                let d = t.decide(&env, &mut teacher_rng);
                corrections += d.corrections();
                fallbacks += usize::from(d.fallback.is_some());
                Some(d.actions)
            } else {
                None
            };
            let mut executed = match (&expert, cfg.rollout) {
                (Some(a), RolloutPolicy::Teacher) => a.clone(),
                _ => student.clone(),
            };
            if cfg.student_tools && executed == student {
                let pri = PriorityList::build(&env, &cfg.teacher.priority, &mut teacher_rng);
                executed = safety_check(&executed, &env, &pri, cfg.teacher.horizon).actions;
            }

            let out = env.step(&executed)?;
            steps += 1;
            let next_live: Vec<(VehicleId, &ObservationMatrix)> =
                out.observations.iter().filter(|(id, _)| !out.dones[id]).map(|(id, o)| (*id, o)).collect();
            let next_joint = joint_input(&cavs, &next_live, n_agents, obs_dim);

            for id in &live {
                let k = slot_of(&cavs, *id, n_agents);
                let r = out.rewards[id] * cfg.reward_scale;
                let done = out.dones[id];
                let s_in = self.critic_in(&joint, &obs[id]);
                let s_next = self.critic_in(&next_joint, &out.observations[id]);
                let agent = &self.agents[k];
                let v_s = agent.value(&s_in)?;
                let v_next = if done { 0.0 } else { agent.value(&s_next)? };
                let adv = advantage(r, v_s, v_next, cfg.gamma, done);

                if let Some(expert) = &expert {
                    self.buffers[k].push(Transition {
                        obs: obs[id].as_slice().to_vec(),
                        action: expert[id],
                        reward: r,
                        next_obs: out.observations[id].as_slice().to_vec(),
                        done,
                        joint_obs: s_in.clone(),
                    });
                }

                let o = obs[id].as_slice();
                let pg = [PgItem { obs: o, action: executed[id].index(), advantage: adv }];
                let batch = if lambda > 0.0 { self.sample_kl(k, &mut buffer_rng) } else { Vec::new() };
                let kl: Vec<KlItem<'_, f64>> = batch
                    .iter()
                    .map(|&i| {
                        let t = self.buffers[k].get(i).expect("sampled index");
                        KlItem { obs: &t.obs, teacher: teacher_distribution(t.action, cfg.smoothing) }
                    })
                    .collect();
                let g = actor_loss(&self.agents[k].actor, &pg, &kl, lambda)?.grad;
                self.agents[k].apply_actor_grad(g, cfg.grad_clip);
                if lambda > 0.0 {
                    for _ in 0..cfg.distill_updates {
                        let batch = self.sample_kl(k, &mut buffer_rng);
                        let kl: Vec<KlItem<'_, f64>> = batch
                            .iter()
                            .map(|&i| {
                                let t = self.buffers[k].get(i).expect("sampled index");
                                KlItem { obs: &t.obs, teacher: teacher_distribution(t.action, cfg.smoothing) }
                            })
                            .collect();
                        let g = actor_loss(&self.agents[k].actor, &[], &kl, lambda)?.grad;
                        self.agents[k].apply_actor_grad(g, cfg.grad_clip);
                    }
                }

                let tr = &mut traces[k];
                tr.critic_in.push(s_in);
                tr.rewards.push(r);
                if out.done && !done {
                    tr.bootstrap = Some(s_next);
                }
            }
            obs = out.observations;
        }

        for (k, tr) in traces.into_iter().enumerate() {
            if tr.rewards.is_empty() {
                continue;
            }
            let mut ret = match &tr.bootstrap {
                Some(s) => self.agents[k].value(s)?,
                None => 0.0,
            };
            let mut returns = vec![0.0; tr.rewards.len()];
            for t in (0..tr.rewards.len()).rev() {
                ret = tr.rewards[t] + cfg.gamma * ret;
                returns[t] = ret;
            }
            let batch: Vec<(&[f64], f64)> = tr.critic_in.iter().map(|s| s.as_slice()).zip(returns).collect();
            for _ in 0..cfg.critic_epochs {
                let g = critic_loss(&self.agents[k].critic, &batch)?.grad;
                self.agents[k].apply_critic_grad(g, cfg.grad_clip);
            }
        }

        self.episode += 1;
        if self.episode == cfg.teaching_episodes {
            // λ is zero from here on; demonstrations are no longer read.
            self.buffers.iter_mut().for_each(ExpertBuffer::clear);
        }
        if self.episode % cfg.eval_interval == 0 {
            self.evaluate_and_log(lambda)?;
        }
        Ok(EpisodeReport { episode: e, lambda, teacher_consulted: teaching, steps, corrections, fallbacks })
    }

    fn sample_kl(&self, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = self.buffers[k].len();
        if n == 0 {
            return Vec::new();
        }
        (0..self.config.kl_batch).map(|_| rng.random_range(0..n)).collect()
    }

    /// Greedy evaluation episodes for the current policies, on seeds fixed
    /// for the whole run so evaluation points are comparable.
    pub fn evaluate(&self) -> Result<Vec<EpisodeMetrics>, MarlError> {
        (0..self.config.eval_episodes)
            .map(|j| run_greedy_episode(&self.agents, &self.config.env, derive_seed(self.config.seed, Stream::Eval, j as u64)))
            .collect()
    }

    fn evaluate_and_log(&mut self, lambda: f64) -> Result<(), MarlError> {
        let eps = self.evaluate()?;
        let s = summarize(&eps);
        let episode = self.episode;
        for k in 0..self.agents.len() {
            if let Some(a) = summarize_agent(&eps, k) {
                self.log.push(LogRow {
                    episode,
                    agent: k.to_string(),
                    eval_reward: a.reward,
                    collision_rate: a.collision_rate,
                    avg_speed: a.avg_speed,
                    avg_pet: s.avg_pet,
                    lambda,
                });
            }
        }
        self.log.push(LogRow {
            episode,
            agent: LogRow::TEAM.to_string(),
            eval_reward: s.reward,
            collision_rate: s.collision_rate,
            avg_speed: s.avg_speed,
            avg_pet: s.avg_pet,
            lambda,
        });
        Ok(())
    }

    /// Trains up to `until` total episodes (capped at the configured
    /// budget), calling `checkpoint` after every evaluation point.
    pub fn run_until(&mut self, until: usize, mut checkpoint: impl FnMut(&Self) -> Result<(), MarlError>) -> Result<(), MarlError> {
        let until = until.min(self.config.total_episodes());
        while self.episode < until {
            let r = self.train_episode();
            if let Err(e) = r {
                checkpoint(self)?;
                return Err(e);
            }
            if self.episode % self.config.eval_interval == 0 {
                checkpoint(self)?;
            }
        }
        Ok(())
    }

    pub fn run(&mut self, checkpoint: impl FnMut(&Self) -> Result<(), MarlError>) -> Result<(), MarlError> {
        self.run_until(self.config.total_episodes(), checkpoint)
    }
}

impl<P> Trainer<P> {
    pub fn greedy_action(&self, slot: usize, obs: &[f64]) -> Result<Action, MarlError> {
        self.agents[slot].greedy(obs)
    }
}
