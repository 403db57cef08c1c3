//! Teacher backends selectable at run time.

use crate::config::{Backend, ExperimentConfig};
use crate::error::Result;
use ldpd_core::sim::JointAction;
use ldpd_core::teacher::{OraclePlanner, Planner, PlannerError, PlanningContext, Teacher};
use ldpd_llm::{LlmClient, LlmPlanner, SessionStore};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum AnyPlanner {
    Oracle(OraclePlanner),
    Llm(Box<LlmPlanner>),
}

impl Planner for AnyPlanner {
    fn name(&self) -> &str {
        match self {
            AnyPlanner::Oracle(p) => p.name(),
            AnyPlanner::Llm(p) => p.name(),
        }
    }

    fn plan(&mut self, ctx: &PlanningContext<'_>) -> std::result::Result<JointAction, PlannerError> {
        match self {
            AnyPlanner::Oracle(p) => p.plan(ctx),
            AnyPlanner::Llm(p) => p.plan(ctx),
        }
    }
}

/// Opens the session store the config asks for, if any.
pub fn open_store(cfg: &ExperimentConfig) -> Result<Option<Arc<SessionStore>>> {
    use ldpd_llm::Mode;
    Ok(match (&cfg.llm.store, cfg.llm.mode) {
        (Some(path), Mode::Replay) => Some(Arc::new(SessionStore::open_existing(path)?)),
        (Some(path), _) => Some(Arc::new(SessionStore::open(path)?)),
        (None, _) => None,
    })
}

/// Builds the planner of the configured backend. One store handle may be
/// shared by every planner of a run.
pub fn make_planner(cfg: &ExperimentConfig, store: Option<Arc<SessionStore>>) -> Result<AnyPlanner> {
    Ok(match cfg.backend {
        Backend::Oracle => AnyPlanner::Oracle(OraclePlanner),
        Backend::Llm => {
            let client = LlmClient::http(cfg.llm_config(), cfg.llm.mode, store)?;
            AnyPlanner::Llm(Box::new(LlmPlanner::new(client).per_cav(cfg.llm.per_cav)))
        }
    })
}

pub fn make_teacher(cfg: &ExperimentConfig, store: Option<Arc<SessionStore>>) -> Result<Teacher<AnyPlanner>> {
    Ok(Teacher::new(cfg.train.teacher.clone(), make_planner(cfg, store)?))
}
