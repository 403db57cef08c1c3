//! Planner backends producing the initial joint action.

use super::conflict::{ConflictKind, ConflictReport};
use super::priority::PriorityList;
use super::scene::ScenarioDescription;
use crate::sim::{Action, Env, JointAction, VehicleId};
use thiserror::Error;

/// Inputs available to a planner for one decision.
#[derive(Debug, Clone, Copy)]
pub struct PlanningContext<'a> {
    pub env: &'a Env,
    pub descriptions: &'a [ScenarioDescription],
    pub conflicts: &'a ConflictReport,
    pub priorities: &'a PriorityList,
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("planner backend failed: {0}")]
    Backend(String),
}

pub trait Planner {
    fn name(&self) -> &str;
    fn plan(&mut self, ctx: &PlanningContext<'_>) -> Result<JointAction, PlannerError>;
}

/// Deterministic rule planner: follow each CAV's inferred intention, and
/// make the yielding CAV of every high-risk conflict slow down.
#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePlanner;

/// Which CAV (if any) should yield in a high-risk pair. Followers yield to
/// leaders; between two merging CAVs the lower priority yields; a CAV yields
/// to a human driver it would reach the conflict point after.
pub fn yielding_cav(c: &super::conflict::Conflict, env: &Env, priorities: &PriorityList) -> Option<VehicleId> {
    let is_cav = |id: VehicleId| env.state().vehicle(id).is_some_and(|v| v.is_cav());
    match c.kind {
        ConflictKind::Following => is_cav(c.a).then_some(c.a),
        ConflictKind::Merge => match (is_cav(c.a), is_cav(c.b)) {
            (true, true) => Some(if priorities.outranks(c.a, c.b) { c.b } else { c.a }),
            (true, false) => (c.ttcp_a >= c.ttcp_b).then_some(c.a),
            (false, true) => (c.ttcp_b >= c.ttcp_a).then_some(c.b),
            (false, false) => None,
        },
    }
}

pub fn oracle_plan(
    descriptions: &[ScenarioDescription],
    conflicts: &ConflictReport,
    env: &Env,
    priorities: &PriorityList,
) -> JointAction {
    let mut out = JointAction::new();
    for d in descriptions {
        if let Some(i) = d.intentions.get(&d.cav) {
            out.insert(d.cav, i.behavior);
        }
    }
    for c in conflicts.high_risk() {
        if let Some(y) = yielding_cav(c, env, priorities) {
            if out.contains_key(&y) {
                out.insert(y, Action::SlowDown);
            }
        }
    }
    out
}

impl Planner for OraclePlanner {
    fn name(&self) -> &str {
        "oracle"
    }

    fn plan(&mut self, ctx: &PlanningContext<'_>) -> Result<JointAction, PlannerError> {
        Ok(oracle_plan(ctx.descriptions, ctx.conflicts, ctx.env, ctx.priorities))
    }
}
