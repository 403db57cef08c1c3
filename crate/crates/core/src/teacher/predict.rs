//! Short-horizon trajectory prediction by rolling the simulator forward.

use crate::sim::{Action, CollisionEvent, Env, JointAction, VehicleId, VehicleState};
use std::collections::BTreeSet;

/// Vehicle states after each of `T_n` decision periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectories {
    /// `frames[k - 1]` is the state after `k` periods.
    pub frames: Vec<Vec<VehicleState>>,
    /// Vehicles that crashed during the rollout.
    pub crashed: BTreeSet<VehicleId>,
    /// Collisions logged during the rollout.
    pub collisions: Vec<CollisionEvent>,
}

impl Trajectories {
    pub fn horizon(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, k: usize) -> &[VehicleState] {
        &self.frames[k - 1]
    }

    pub fn position(&self, id: VehicleId, k: usize) -> Option<f64> {
        self.frame(k).iter().find(|v| v.id == id).map(|v| v.x)
    }
}

/// Rolls the scene forward `horizon` decision periods. CAVs execute
/// `actions` in the first period (missing entries cruise) and then hold
/// their setpoints; HVs follow IDM and MOBIL exactly as in the simulator.
/// Episode time limits do not apply to predictions.
pub fn predict_trajectories(env: &Env, actions: &JointAction, horizon: usize) -> Trajectories {
    let mut config = env.config().clone();
    config.time_limit = f64::INFINITY;
    let mut state = env.state().clone();
    state.done = false;
    let logged = state.collisions.len();
    let mut sim = Env::from_state(config, state).expect("geometry already validated");
    let mut frames = Vec::with_capacity(horizon);
    let mut crashed = BTreeSet::new();
    for k in 0..horizon {
        if !sim.is_done() {
            let live = sim.state().live_cavs();
            let joint: JointAction = live
                .into_iter()
                .map(|id| {
                    let a = if k == 0 { actions.get(&id).copied().unwrap_or(Action::Cruise) } else { Action::Cruise };
                    (id, a)
                })
                .collect();
            let (c, _) = sim.advance(&joint).expect("rollout joint covers live cavs");
            crashed.extend(c);
        }
        frames.push(sim.state().vehicles.clone());
    }
    let collisions = sim.state().collisions[logged..].to_vec();
    Trajectories { frames, crashed, collisions }
}
