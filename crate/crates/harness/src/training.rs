//! Seeded training runs with checkpoints, curves and a final report.

use crate::backend::{make_planner, open_store, AnyPlanner};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::evaluation::evaluate;
use crate::report::{emit_report, mean_curve, write_plot_csv, ReportFiles};
use ldpd_core::teacher::Teacher;
use ldpd_marl::log::write_log;
use ldpd_marl::{Checkpoint, LogRow, MarlError, Trainer};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub checkpoint: PathBuf,
    pub curve: PathBuf,
    pub log: Vec<LogRow>,
    /// Episode the run resumed from (0 for a fresh start).
    pub resumed_at: usize,
    pub episodes: usize,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutput {
    pub runs: Vec<SeedRun>,
    pub mean_curve: PathBuf,
    pub plot: PathBuf,
    /// Held-out report, written once every run has finished.
    pub report: Option<ReportFiles>,
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

fn save_artifacts(t: &Trainer<AnyPlanner>, ckpt: &Path, curve: &Path) -> std::result::Result<(), MarlError> {
    Checkpoint::capture(t).save(ckpt)?;
    let f = std::fs::File::create(curve)?;
    write_log(&t.log, f)
}

/// Builds one planner per training run.
pub type PlannerFactory<'a> = dyn Fn() -> Result<AnyPlanner> + Sync + 'a;

fn train_seed(cfg: &ExperimentConfig, out: &Path, seed: u64, until: Option<usize>, planners: &PlannerFactory<'_>) -> Result<SeedRun> {
    let dir = seed_dir(out, seed);
    std::fs::create_dir_all(&dir).map_err(HarnessError::io(&dir))?;
    let ckpt_path = dir.join("checkpoint.json");
    let curve = dir.join("curve.csv");
    let tc = cfg.train_config(seed);
    let teacher = if tc.teaching_episodes > 0 { Some(Teacher::new(tc.teacher.clone(), planners()?)) } else { None };
    let mut trainer = if ckpt_path.exists() {
        let ck = Checkpoint::load(&ckpt_path)?;
        if ck.config != tc {
            return Err(HarnessError::ForeignCheckpoint(ckpt_path));
        }
        ck.into_trainer(teacher)
    } else {
        Trainer::new(tc, teacher)?
    };
    let resumed_at = trainer.episode;
    let target = until.unwrap_or(usize::MAX);
    trainer.run_until(target, |t| save_artifacts(t, &ckpt_path, &curve))?;
    save_artifacts(&trainer, &ckpt_path, &curve)?;
    Ok(SeedRun {
        seed,
        checkpoint: ckpt_path,
        curve,
        log: trainer.log.clone(),
        resumed_at,
        episodes: trainer.episode,
        finished: trainer.is_finished(),
    })
}

pub fn run_training(cfg: &ExperimentConfig, out: &Path) -> Result<TrainingOutput> {
    run_training_until(cfg, out, None)
}

/// Trains every seed up to `until` total episodes (the full budget when
/// `None`), resuming from checkpoints found under `out`.
pub fn run_training_until(cfg: &ExperimentConfig, out: &Path, until: Option<usize>) -> Result<TrainingOutput> {
    cfg.validate()?;
    let store = if cfg.train.teaching_episodes > 0 { open_store(cfg)? } else { None };
    run_training_with(cfg, out, until, &|| make_planner(cfg, store.clone()))
}

/// As [`run_training_until`] with teacher planners from `planners`.
pub fn run_training_with(
    cfg: &ExperimentConfig,
    out: &Path,
    until: Option<usize>,
    planners: &PlannerFactory<'_>,
) -> Result<TrainingOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(HarnessError::io(out))?;
    std::fs::write(out.join("config.txt"), cfg.to_text()).map_err(HarnessError::io(out.join("config.txt")))?;
    let runs: Vec<SeedRun> = cfg.seeds.par_iter().map(|&s| train_seed(cfg, out, s, until, planners)).collect::<Result<_>>()?;

    let curves: Vec<(u64, Vec<LogRow>)> = runs.iter().map(|r| (r.seed, r.log.clone())).collect();
    let mean_path = out.join("curve_mean.csv");
    let f = std::fs::File::create(&mean_path).map_err(HarnessError::io(&mean_path))?;
    write_log(&mean_curve(&curves), f)?;
    let plot = out.join("plot.csv");
    write_plot_csv(&curves, &plot)?;

    let report = if runs.iter().all(|r| r.finished) && cfg.final_eval_episodes > 0 {
        let rows = runs
            .iter()
            .map(|r| {
                let ck = Checkpoint::load(&r.checkpoint)?;
                evaluate(&ck, cfg.scenario, cfg.density, cfg.final_eval_episodes, cfg.eval_seed)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(emit_report(&rows, out, "report")?)
    } else {
        None
    };
    Ok(TrainingOutput { runs, mean_curve: mean_path, plot, report })
}
