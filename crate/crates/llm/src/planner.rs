//! The chat model as a teacher planner backend.

use crate::client::{LlmClient, LlmError};
use crate::parse::{parse_decision, ParseError};
use crate::prompt::render_prompt_for;
use crate::react::{run_react, ReactOutcome};
use crate::tools::{default_tools, ToolContext, ToolSpec};
use ldpd_core::sim::{JointAction, VehicleId};
use ldpd_core::teacher::{Planner, PlannerError, PlanningContext};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// One joint call for all CAVs by default; `per_cav` asks once per CAV.
#[derive(Debug, Clone)]
pub struct LlmPlanner {
    client: LlmClient,
    tools: Vec<ToolSpec>,
    pub per_cav: bool,
    /// Loop traces of the most recent `plan` call.
    pub last_runs: Vec<ReactOutcome>,
}

impl LlmPlanner {
    pub fn new(client: LlmClient) -> Self {
        Self { client, tools: default_tools(), per_cav: false, last_runs: Vec::new() }
    }

    pub fn with_tools(mut self, tools: Vec<ToolSpec>) -> Self {
        self.tools = tools;
        self
    }

    pub fn per_cav(mut self, per_cav: bool) -> Self {
        self.per_cav = per_cav;
        self
    }

    pub fn client(&self) -> &LlmClient {
        &self.client
    }

    fn ask(&mut self, ctx: &PlanningContext<'_>, targets: &[VehicleId]) -> Result<JointAction, DecisionError> {
        let messages = render_prompt_for(ctx.descriptions, ctx.conflicts, targets, !self.tools.is_empty());
        let tool_ctx = ToolContext { env: ctx.env, descriptions: ctx.descriptions, conflicts: ctx.conflicts };
        let run = run_react(&self.client, messages, &self.tools, &tool_ctx, self.client.config().max_tool_calls)?;
        let decision = parse_decision(&run.final_text, targets);
        self.last_runs.push(run);
        Ok(decision?)
    }

    pub fn decide(&mut self, ctx: &PlanningContext<'_>) -> Result<JointAction, DecisionError> {
        self.last_runs.clear();
        let cavs: Vec<VehicleId> = ctx.descriptions.iter().map(|d| d.cav).collect();
        if !self.per_cav {
            return self.ask(ctx, &cavs);
        }
        let mut out = JointAction::new();
        for cav in cavs {
            out.extend(self.ask(ctx, &[cav])?);
        }
        Ok(out)
    }
}

impl Planner for LlmPlanner {
    fn name(&self) -> &str {
        "llm"
    }

    fn plan(&mut self, ctx: &PlanningContext<'_>) -> Result<JointAction, PlannerError> {
        self.decide(ctx).map_err(|e| PlannerError::Backend(e.to_string()))
    }
}
