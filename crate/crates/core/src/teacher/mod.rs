//! Expert teacher agent: observation enhancement, conflict checking, a
//! pluggable planner, and the priority-driven safety checker.

pub mod conflict;
pub mod decide;
pub mod planner;
pub mod predict;
pub mod priority;
pub mod safety;
pub mod scene;
pub mod ttcp;

pub use conflict::{conflict_check, Conflict, ConflictKind, ConflictReport, RiskLevel, RiskThresholds};
pub use decide::{analyse, SceneAnalysis, Teacher, TeacherConfig, TeacherDecision};
pub use planner::{oracle_plan, OraclePlanner, Planner, PlannerError, PlanningContext};
pub use predict::{predict_trajectories, Trajectories};
pub use priority::{PriorityList, PriorityParams};
pub use safety::{correct_action, min_margin, safety_check, safety_margin, Provenance};
pub use scene::{enhance_observation, infer_intention, Intention, LaneRelation, ScenarioDescription, VehicleRelation};
pub use ttcp::delta_ttcp;
