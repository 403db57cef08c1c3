//! The full teacher decision: enhance, plan, verify.

use super::conflict::{conflict_check, ConflictReport, RiskThresholds};
use super::planner::{oracle_plan, Planner, PlanningContext};
use super::priority::{PriorityList, PriorityParams};
use super::safety::{safety_check, Provenance};
use super::scene::{enhance_observation, ScenarioDescription};
use crate::sim::{Env, JointAction, VehicleId, VehicleLabel, VehicleKind};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherConfig {
    /// Prediction horizon T_n in decision periods.
    pub horizon: usize,
    pub risk: RiskThresholds,
    pub priority: PriorityParams,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        Self { horizon: 3, risk: RiskThresholds::default(), priority: PriorityParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherDecision {
    /// Final joint action A*.
    pub actions: JointAction,
    pub provenance: BTreeMap<VehicleId, Provenance>,
    /// Planner output A before the safety check.
    pub planned: JointAction,
    pub priorities: PriorityList,
    pub backend: String,
    /// Set when the configured backend failed and the oracle stood in.
    pub fallback: Option<String>,
}

impl TeacherDecision {
    pub fn corrections(&self) -> usize {
        self.provenance.values().filter(|p| **p == Provenance::SafetyCorrected).count()
    }

    /// JSON view keyed by vehicle labels (`c1`, `c2`, ...).
    pub fn to_json(&self) -> serde_json::Value {
        let lbl = |id: &VehicleId| VehicleLabel { id: *id, kind: VehicleKind::Cav }.to_string();
        let map = |m: &JointAction| {
            m.iter().map(|(k, v)| (lbl(k), serde_json::Value::from(v.token()))).collect::<serde_json::Map<_, _>>()
        };
        serde_json::json!({
            "actions": map(&self.actions),
            "planned": map(&self.planned),
            "provenance": self.provenance.iter().map(|(k, v)| (lbl(k), serde_json::to_value(v).unwrap())).collect::<serde_json::Map<_, _>>(),
            "priorities": self.priorities.0.iter().map(|(k, s)| serde_json::json!([lbl(k), s])).collect::<Vec<_>>(),
            "backend": self.backend,
            "fallback": self.fallback,
        })
    }
}

/// Everything the teacher derives from a scene before planning.
#[derive(Debug, Clone)]
pub struct SceneAnalysis {
    pub descriptions: Vec<ScenarioDescription>,
    pub conflicts: ConflictReport,
    pub priorities: PriorityList,
}

pub fn analyse<R: Rng + ?Sized>(env: &Env, cfg: &TeacherConfig, rng: &mut R) -> SceneAnalysis {
    let descriptions: Vec<ScenarioDescription> = env
        .state()
        .live_cavs()
        .into_iter()
        .map(|id| enhance_observation(env, id).expect("live cav"))
        .collect();
    let conflicts = conflict_check(&descriptions, env, &cfg.risk);
    let priorities = PriorityList::build(env, &cfg.priority, rng);
    SceneAnalysis { descriptions, conflicts, priorities }
}

/// Teacher agent around a planner backend.
#[derive(Debug, Clone)]
pub struct Teacher<P> {
    pub config: TeacherConfig,
    pub planner: P,
}

impl<P: Planner> Teacher<P> {
    pub fn new(config: TeacherConfig, planner: P) -> Self {
        Self { config, planner }
    }

    /// One decision for all live CAVs of `env`. Randomness (priority noise)
    /// comes only from `rng`.
    pub fn decide<R: Rng + ?Sized>(&mut self, env: &Env, rng: &mut R) -> TeacherDecision {
        let analysis = analyse(env, &self.config, rng);
        self.decide_with(env, &analysis)
    }

    pub fn decide_with(&mut self, env: &Env, analysis: &SceneAnalysis) -> TeacherDecision {
        let ctx = PlanningContext {
            env,
            descriptions: &analysis.descriptions,
            conflicts: &analysis.conflicts,
            priorities: &analysis.priorities,
        };
        let (planned, fallback) = match self.planner.plan(&ctx) {
            Ok(a) => (a, None),
            Err(e) => (
                oracle_plan(&analysis.descriptions, &analysis.conflicts, env, &analysis.priorities),
                Some(e.to_string()),
            ),
        };
        let checked = safety_check(&planned, env, &analysis.priorities, self.config.horizon);
        TeacherDecision {
            actions: checked.actions,
            provenance: checked.provenance,
            planned,
            priorities: analysis.priorities.clone(),
            backend: self.planner.name().to_string(),
            fallback,
        }
    }
}
