//! Experiment orchestration: configs, seeded training runs, held-out
//! evaluation, cross-density validation, reports and action traces.

pub mod backend;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod report;
pub mod trace;
pub mod training;

pub use backend::{make_planner, make_teacher, open_store, AnyPlanner};
pub use config::{Backend, ExperimentConfig, LlmSettings};
pub use error::{HarnessError, Result};
pub use evaluation::{cross_validate, eval_episode_seeds, evaluate, evaluate_detailed, EvalRow};
pub use report::{emit_report, mean_curve, plot_rows, write_plot_csv, MeanRow, Report, ReportFiles, KEY_COLUMNS, METRIC_COLUMNS, REPORT_SCHEMA};
pub use trace::{read_trace, record_trace, replay_trace, write_trace, TraceLine};
pub use training::{run_training, run_training_until, run_training_with, seed_dir, PlannerFactory, SeedRun, TrainingOutput};
