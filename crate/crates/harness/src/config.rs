//! Experiment configuration and its `key = value` text format.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored and
//! later lines override earlier ones. Lists are comma separated:
//!
//! ```text
//! scenario = 1
//! density = easy
//! seeds = 1, 2, 3
//! teaching_episodes = 2000
//! self_episodes = 18000
//! backend = oracle        # or llm
//! ```

use crate::error::{HarnessError, Result};
use ldpd_core::sim::{Density, EnvConfig};
use ldpd_llm::Mode;
use ldpd_marl::{CriticInput, RolloutPolicy, TrainConfig};
use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Oracle,
    Llm,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(Backend::Oracle),
            "llm" => Ok(Backend::Llm),
            other => Err(format!("unknown backend {other:?}, expected oracle or llm")),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Oracle => "oracle",
            Backend::Llm => "llm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmSettings {
    pub endpoint: String,
    pub model: String,
    pub mode: Mode,
    pub store: Option<PathBuf>,
    pub temperature: f64,
    pub api_key_env: String,
    pub per_cav: bool,
    pub max_tool_calls: usize,
}

impl Default for LlmSettings {
    fn default() -> Self {
        let d = ldpd_llm::LlmConfig::default();
        Self {
            endpoint: d.endpoint,
            model: d.model,
            mode: Mode::Live,
            store: None,
            temperature: d.temperature,
            api_key_env: d.api_key_env,
            per_cav: false,
            max_tool_calls: d.max_tool_calls,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: u8,
    pub density: Density,
    pub seeds: Vec<u64>,
    pub backend: Backend,
    pub llm: LlmSettings,
    /// Training hyperparameters; `env` and `seed` are filled per run.
    pub train: TrainConfig,
    /// Held-out episodes of the final evaluation of every seed.
    pub final_eval_episodes: usize,
    /// Seed of the held-out evaluation episodes, shared by all runs.
    pub eval_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: 1,
            density: Density::Easy,
            seeds: vec![1, 2, 3],
            backend: Backend::Oracle,
            llm: LlmSettings::default(),
            train: TrainConfig::new(EnvConfig::new(1, Density::Easy), 0),
            final_eval_episodes: 100,
            eval_seed: 1000,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String>
where
    T::Err: Display,
{
    v.parse::<T>().map_err(|e| format!("{key}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn enum_str<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn parse_enum<T: serde::de::DeserializeOwned>(key: &str, v: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(v.to_ascii_lowercase())).map_err(|_| format!("{key}: unknown value {v:?}"))
}

impl ExperimentConfig {
    /// Applies one setting.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let t = &mut self.train;
        match key.trim() {
            "scenario" => self.scenario = parse(key, v)?,
            "density" => self.density = parse(key, v)?,
            "seeds" => self.seeds = parse_list(key, v)?,
            "backend" => self.backend = parse(key, v)?,
            "final_eval_episodes" => self.final_eval_episodes = parse(key, v)?,
            "eval_seed" => self.eval_seed = parse(key, v)?,
            "llm_endpoint" => self.llm.endpoint = v.to_string(),
            "llm_model" => self.llm.model = v.to_string(),
            "llm_mode" => self.llm.mode = parse(key, v)?,
            "llm_store" => self.llm.store = (!v.is_empty()).then(|| PathBuf::from(v)),
            "llm_temperature" => self.llm.temperature = parse(key, v)?,
            "llm_api_key_env" => self.llm.api_key_env = v.to_string(),
            "llm_per_cav" => self.llm.per_cav = parse(key, v)?,
            "llm_max_tool_calls" => self.llm.max_tool_calls = parse(key, v)?,
            "teaching_episodes" => t.teaching_episodes = parse(key, v)?,
            "self_episodes" => t.self_episodes = parse(key, v)?,
            "lambda0" => t.lambda0 = parse(key, v)?,
            "gamma" => t.gamma = parse(key, v)?,
            "lr" => t.optimizer.lr = parse(key, v)?,
            "rms_decay" => t.optimizer.decay = parse(key, v)?,
            "rms_eps" => t.optimizer.eps = parse(key, v)?,
            "grad_clip" => t.grad_clip = parse(key, v)?,
            "hidden" => t.hidden = parse_list(key, v)?,
            "smoothing" => t.smoothing = parse(key, v)?,
            "kl_batch" => t.kl_batch = parse(key, v)?,
            "distill_updates" => t.distill_updates = parse(key, v)?,
            "buffer_capacity" => t.buffer_capacity = parse(key, v)?,
            "critic_epochs" => t.critic_epochs = parse(key, v)?,
            "eval_interval" => t.eval_interval = parse(key, v)?,
            "eval_episodes" => t.eval_episodes = parse(key, v)?,
            "critic_input" => t.critic_input = parse_enum::<CriticInput>(key, v)?,
            "rollout" => t.rollout = parse_enum::<RolloutPolicy>(key, v)?,
            "student_tools" => t.student_tools = parse(key, v)?,
            "reward_scale" => t.reward_scale = parse(key, v)?,
            "time_limit" => t.env.time_limit = parse(key, v)?,
            "teacher_horizon" => t.teacher.horizon = parse(key, v)?,
            "priority_noise" => t.teacher.priority.noise_std = parse(key, v)?,
            "risk_high_delta" => t.teacher.risk.high_delta = parse(key, v)?,
            "risk_low_delta" => t.teacher.risk.low_delta = parse(key, v)?,
            "risk_horizon" => t.teacher.risk.horizon = parse(key, v)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Every setting in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let t = &self.train;
        vec![
            ("scenario", self.scenario.to_string()),
            ("density", self.density.to_string()),
            ("seeds", join(&self.seeds)),
            ("backend", self.backend.to_string()),
            ("teaching_episodes", t.teaching_episodes.to_string()),
            ("self_episodes", t.self_episodes.to_string()),
            ("final_eval_episodes", self.final_eval_episodes.to_string()),
            ("eval_seed", self.eval_seed.to_string()),
            ("eval_interval", t.eval_interval.to_string()),
            ("eval_episodes", t.eval_episodes.to_string()),
            ("lambda0", t.lambda0.to_string()),
            ("gamma", t.gamma.to_string()),
            ("lr", t.optimizer.lr.to_string()),
            ("rms_decay", t.optimizer.decay.to_string()),
            ("rms_eps", t.optimizer.eps.to_string()),
            ("grad_clip", t.grad_clip.to_string()),
            ("hidden", join(&t.hidden)),
            ("smoothing", t.smoothing.to_string()),
            ("kl_batch", t.kl_batch.to_string()),
            ("distill_updates", t.distill_updates.to_string()),
            ("buffer_capacity", t.buffer_capacity.to_string()),
            ("critic_epochs", t.critic_epochs.to_string()),
            ("critic_input", enum_str(&t.critic_input)),
            ("rollout", enum_str(&t.rollout)),
            ("student_tools", t.student_tools.to_string()),
            ("reward_scale", t.reward_scale.to_string()),
            ("time_limit", t.env.time_limit.to_string()),
            ("teacher_horizon", t.teacher.horizon.to_string()),
            ("priority_noise", t.teacher.priority.noise_std.to_string()),
            ("risk_high_delta", t.teacher.risk.high_delta.to_string()),
            ("risk_low_delta", t.teacher.risk.low_delta.to_string()),
            ("risk_horizon", t.teacher.risk.horizon.to_string()),
            ("llm_endpoint", self.llm.endpoint.clone()),
            ("llm_model", self.llm.model.clone()),
            ("llm_mode", self.llm.mode.to_string()),
            ("llm_store", self.llm.store.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("llm_temperature", self.llm.temperature.to_string()),
            ("llm_api_key_env", self.llm.api_key_env.clone()),
            ("llm_per_cav", self.llm.per_cav.to_string()),
            ("llm_max_tool_calls", self.llm.max_tool_calls.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Parses a config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::ConfigLine { line: i + 1, msg: "expected key = value".into() })?;
            self.set(k, v).map_err(|msg| HarnessError::ConfigLine { line: i + 1, msg })?;
        }
        self.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(HarnessError::io(path))?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(HarnessError::Config("seeds must be distinct".into()));
        }
        ldpd_core::sim::RoadNetwork::build(self.scenario).map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.backend == Backend::Llm && self.llm.mode != Mode::Live && self.llm.store.is_none() {
            return Err(HarnessError::Config("llm_mode record or replay needs llm_store".into()));
        }
        self.train_config(self.seeds[0]).validate()?;
        Ok(())
    }

    /// Trainer configuration of one seed.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let mut c = self.train.clone();
        let time_limit = c.env.time_limit;
        c.env = EnvConfig { scenario_id: self.scenario, density: self.density, time_limit, ..c.env };
        c.seed = seed;
        c
    }

    pub fn llm_config(&self) -> ldpd_llm::LlmConfig {
        ldpd_llm::LlmConfig {
            endpoint: self.llm.endpoint.clone(),
            model: self.llm.model.clone(),
            temperature: self.llm.temperature,
            api_key_env: self.llm.api_key_env.clone(),
            max_tool_calls: self.llm.max_tool_calls,
            ..ldpd_llm::LlmConfig::default()
        }
    }
}
