//! CAV priority scores used to order the safety checker.

use crate::scalar::Scalar;
use crate::sim::traffic;
use crate::sim::{Env, VehicleId};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Cap on |p_h|; also the value for a zero or negative headway.
pub const HEADWAY_PRIORITY_CAP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorityParams {
    /// Weights of the merge, merge-end and time-headway terms.
    pub alpha: [f64; 3],
    /// Standard deviation of the tie-breaking noise; 0 disables it.
    pub noise_std: f64,
    /// Desired time headway t_h (s).
    pub time_headway: f64,
}

impl Default for PriorityParams {
    fn default() -> Self {
        Self { alpha: [1.0, 1.0, 1.0], noise_std: 0.001, time_headway: 1.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityTerms<S> {
    pub merge: S,
    pub merge_end: S,
    pub headway: S,
}

/// `p_m`: 0.5 on the merge lane, else 0.
pub fn merge_priority<S: Scalar>(on_merge_lane: bool) -> S {
    if on_merge_lane {
        S::lit(0.5)
    } else {
        S::zero()
    }
}

/// `p_e = x / L` on the merge lane, else 0.
pub fn merge_end_priority<S: Scalar>(on_merge_lane: bool, x: S, merge_lane_length: S) -> S {
    if on_merge_lane {
        x / merge_lane_length
    } else {
        S::zero()
    }
}

/// `p_h = −ln(d / (t_h v))`, capped to ±5. A missing leader or a stopped
/// ego gives the lowest value.
pub fn headway_priority<S: Scalar>(headway: Option<S>, speed: S, time_headway: S) -> S {
    let cap = S::lit(HEADWAY_PRIORITY_CAP);
    match headway {
        None => -cap,
        Some(d) if d <= S::zero() => cap,
        Some(_) if speed <= S::zero() => -cap,
        Some(d) => (-(d / (time_headway * speed)).ln()).clamp_to(-cap, cap),
    }
}

pub fn priority_terms<S: Scalar>(
    on_merge_lane: bool,
    x: S,
    merge_lane_length: S,
    headway: Option<S>,
    speed: S,
    time_headway: S,
) -> PriorityTerms<S> {
    PriorityTerms {
        merge: merge_priority(on_merge_lane),
        merge_end: merge_end_priority(on_merge_lane, x, merge_lane_length),
        headway: headway_priority(headway, speed, time_headway),
    }
}

/// `α1 p_m + α2 p_e + α3 p_h + σ`.
pub fn combine<S: Scalar>(t: &PriorityTerms<S>, alpha: [S; 3], noise: S) -> S {
    alpha[0] * t.merge + alpha[1] * t.merge_end + alpha[2] * t.headway + noise
}

/// Priority terms of a vehicle in a live scene.
pub fn scene_terms(env: &Env, cav: VehicleId, p: &PriorityParams) -> Option<PriorityTerms<f64>> {
    let road = env.road();
    let v = env.state().vehicle(cav)?;
    let on_ramp = road.is_ramp(v.lane);
    let ramp_start = road.lane(road.ramp()).map(|l| l.start).unwrap_or(0.0);
    let headway = traffic::leader(v, &env.state().vehicles, v.lane, road).map(|(_, g)| g);
    Some(priority_terms(on_ramp, v.x - ramp_start, road.merge_lane_length, headway, v.speed(), p.time_headway))
}

/// Priority score of one CAV. Noise is drawn from `rng` only when enabled.
pub fn priority_score<R: Rng + ?Sized>(env: &Env, cav: VehicleId, p: &PriorityParams, rng: &mut R) -> Option<f64> {
    let terms = scene_terms(env, cav, p)?;
    let noise = if p.noise_std > 0.0 {
        Normal::new(0.0, p.noise_std).expect("finite std").sample(rng)
    } else {
        0.0
    };
    Some(combine(&terms, p.alpha, noise))
}

/// Live CAVs with their scores, highest first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriorityList(pub Vec<(VehicleId, f64)>);

impl PriorityList {
    pub fn build<R: Rng + ?Sized>(env: &Env, p: &PriorityParams, rng: &mut R) -> Self {
        let mut scores: Vec<(VehicleId, f64)> = env
            .state()
            .live_cavs()
            .into_iter()
            .filter_map(|id| priority_score(env, id, p, rng).map(|s| (id, s)))
            .collect();
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self(scores)
    }

    pub fn order(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.0.iter().map(|(id, _)| *id)
    }

    pub fn score(&self, id: VehicleId) -> Option<f64> {
        self.0.iter().find(|(v, _)| *v == id).map(|(_, s)| *s)
    }

    /// Whether `a` outranks `b`.
    pub fn outranks(&self, a: VehicleId, b: VehicleId) -> bool {
        let pos = |id| self.0.iter().position(|(v, _)| *v == id);
        match (pos(a), pos(b)) {
            (Some(pa), Some(pb)) => pa < pb,
            (Some(_), None) => true,
            _ => false,
        }
    }
}
