//! JSONL action traces: a scene header followed by one joint action per
//! decision step. Replaying a trace re-simulates the episode exactly.

use crate::error::{HarnessError, Result};
use ldpd_core::sim::{Action, Env, EnvConfig, JointAction, SceneSnapshot, VehicleKind, VehicleLabel};
use ldpd_marl::eval::slot_of;
use ldpd_marl::{EpisodeMetrics, EpisodeTracker, StudentAgent};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceLine {
    Header { seed: u64, agents: usize, scene: Box<SceneSnapshot> },
    Step { step: usize, actions: BTreeMap<String, String> },
}

fn labelled(joint: &JointAction) -> BTreeMap<String, String> {
    joint
        .iter()
        .map(|(id, a)| (VehicleLabel { id: *id, kind: VehicleKind::Cav }.to_string(), a.token().to_string()))
        .collect()
}

/// Greedy episode of the students, returned as a trace with its metrics.
pub fn record_trace(agents: &[StudentAgent], config: &EnvConfig, seed: u64) -> Result<(Vec<TraceLine>, EpisodeMetrics)> {
    let (mut env, mut obs) = Env::reset(config.clone(), seed)?;
    let mut lines = vec![TraceLine::Header { seed, agents: agents.len(), scene: Box::new(SceneSnapshot::capture(&env)) }];
    let cavs = env.state().cav_ids();
    let mut tracker = EpisodeTracker::new(&env);
    while !env.is_done() {
        let live = env.state().live_cavs();
        let mut joint = JointAction::new();
        for id in &live {
            let agent = &agents[slot_of(&cavs, *id, agents.len())];
            joint.insert(*id, agent.greedy(obs[id].as_slice()).map_err(HarnessError::from)?);
        }
        lines.push(TraceLine::Step { step: lines.len() - 1, actions: labelled(&joint) });
        let out = env.step(&joint)?;
        tracker.record(&env, &live, &out.rewards);
        obs = out.observations;
    }
    Ok((lines, tracker.finish(&env, seed, agents.len())))
}

pub fn write_trace(lines: &[TraceLine], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(HarnessError::io(path))?);
    for l in lines {
        serde_json::to_writer(&mut f, l)?;
        f.write_all(b"\n").map_err(HarnessError::io(path))?;
    }
    f.flush().map_err(HarnessError::io(path))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>> {
    let f = std::io::BufReader::new(std::fs::File::open(path).map_err(HarnessError::io(path))?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line.map_err(HarnessError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| HarnessError::Trace { line: i + 1, msg: e.to_string() })?);
    }
    Ok(out)
}

/// Re-simulates a trace. Line numbers in errors count the header as line 1.
pub fn replay_trace(lines: &[TraceLine]) -> Result<EpisodeMetrics> {
    let err = |line: usize, msg: String| HarnessError::Trace { line, msg };
    let Some(TraceLine::Header { seed, agents, scene }) = lines.first() else {
        return Err(err(1, "trace must start with a header".into()));
    };
    let mut env = scene.as_ref().clone().into_env()?;
    let mut tracker = EpisodeTracker::new(&env);
    for (i, line) in lines.iter().enumerate().skip(1) {
        let TraceLine::Step { actions, .. } = line else {
            return Err(err(i + 1, "unexpected second header".into()));
        };
        let mut joint = JointAction::new();
        for (label, token) in actions {
            let l: VehicleLabel = label.parse().map_err(|e: String| err(i + 1, e))?;
            let a: Action = token.parse().map_err(|e: ldpd_core::sim::UnknownAction| err(i + 1, e.to_string()))?;
            joint.insert(l.id, a);
        }
        let live = env.state().live_cavs();
        let out = env.step(&joint).map_err(|e| err(i + 1, e.to_string()))?;
        tracker.record(&env, &live, &out.rewards);
    }
    Ok(tracker.finish(&env, *seed, *agents))
}
