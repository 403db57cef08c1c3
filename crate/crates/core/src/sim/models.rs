//! Human-driver models: IDM car following and MOBIL lane changing.
//!
//! Both kernels are generic over [`Scalar`] so the same formulas serve the
//! simulator (`f64`) and reduced-precision callers.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams<S> {
    /// Desired speed (m/s).
    pub v0: S,
    /// Desired time headway (s).
    pub time_headway: S,
    /// Jam distance (m).
    pub s0: S,
    pub a_max: S,
    /// Comfortable deceleration (m/s², positive).
    pub b: S,
    pub delta: S,
    /// Emergency braking bound (m/s², positive); the output floor.
    pub b_hard: S,
}

impl<S: Scalar> Default for IdmParams<S> {
    fn default() -> Self {
        Self {
            v0: S::lit(30.0),
            time_headway: S::lit(1.5),
            s0: S::lit(2.0),
            a_max: S::lit(3.0),
            b: S::lit(2.0),
            delta: S::lit(4.0),
            b_hard: S::lit(5.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilParams<S> {
    pub politeness: S,
    /// Maximum deceleration imposed on the new follower (m/s², positive).
    pub b_safe: S,
    /// Minimum net gain to trigger a change (m/s²).
    pub a_threshold: S,
}

impl<S: Scalar> Default for MobilParams<S> {
    fn default() -> Self {
        Self { politeness: S::lit(0.1), b_safe: S::lit(2.0), a_threshold: S::lit(0.1) }
    }
}

/// Another vehicle as seen from the ego: bumper-to-bumper gap and speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<S> {
    pub gap: S,
    pub speed: S,
}

/// IDM acceleration for a vehicle at speed `v` following `leader` (if any).
/// A non-positive gap yields the emergency-brake floor.
pub fn idm_acceleration<S: Scalar>(v: S, leader: Option<Neighbor<S>>, p: &IdmParams<S>) -> S {
    let v = v.max(S::zero());
    let free = S::one() - (v / p.v0).powf(p.delta);
    let interaction = match leader {
        None => S::zero(),
        Some(l) if l.gap <= S::zero() => return -p.b_hard,
        Some(l) => {
            let dv = v - l.speed;
            let two = S::lit(2.0);
            let dynamic = v * p.time_headway + v * dv / (two * (p.a_max * p.b).sqrt());
            let s_star = p.s0 + dynamic.max(S::zero());
            (s_star / l.gap).powi(2)
        }
    };
    (p.a_max * (free - interaction)).clamp_to(-p.b_hard, p.a_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneChange {
    Stay,
    Left,
    Right,
}

/// Leader and follower of the ego in one lane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaneNeighbors<S> {
    pub leader: Option<Neighbor<S>>,
    pub follower: Option<Neighbor<S>>,
}

/// Everything MOBIL needs about the ego's surroundings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilScene<S> {
    pub ego_speed: S,
    pub ego_length: S,
    pub current: LaneNeighbors<S>,
    pub left: Option<LaneNeighbors<S>>,
    pub right: Option<LaneNeighbors<S>>,
}

/// Net incentive of moving into `target`, or `None` when the safety
/// criterion rejects it.
pub fn mobil_incentive<S: Scalar>(
    scene: &MobilScene<S>,
    target: &LaneNeighbors<S>,
    mobil: &MobilParams<S>,
    idm: &IdmParams<S>,
) -> Option<S> {
    let v = scene.ego_speed;
    // new follower: before vs after the ego cuts in
    let (new_f_before, new_f_after) = match target.follower {
        Some(f) => {
            let before = idm_acceleration(f.speed, target.leader.map(|l| Neighbor {
                gap: l.gap + f.gap + scene.ego_length,
                speed: l.speed,
            }), idm);
            let after = idm_acceleration(f.speed, Some(Neighbor { gap: f.gap, speed: v }), idm);
            (before, after)
        }
        None => (S::zero(), S::zero()),
    };
    if new_f_after < -mobil.b_safe {
        return None;
    }
    if let Some(l) = target.leader {
        if l.gap <= S::zero() {
            return None;
        }
    }
    if let Some(f) = target.follower {
        if f.gap <= S::zero() {
            return None;
        }
    }
    let ego_before = idm_acceleration(v, scene.current.leader, idm);
    let ego_after = idm_acceleration(v, target.leader, idm);
    // old follower: loses the ego as its leader
    let (old_f_before, old_f_after) = match scene.current.follower {
        Some(f) => {
            let before = idm_acceleration(f.speed, Some(Neighbor { gap: f.gap, speed: v }), idm);
            let after = idm_acceleration(f.speed, scene.current.leader.map(|l| Neighbor {
                gap: l.gap + f.gap + scene.ego_length,
                speed: l.speed,
            }), idm);
            (before, after)
        }
        None => (S::zero(), S::zero()),
    };
    let others = (new_f_after - new_f_before) + (old_f_after - old_f_before);
    Some(ego_after - ego_before + mobil.politeness * others)
}

/// MOBIL decision. Ties are resolved stay > left > right.
pub fn mobil_decide<S: Scalar>(
    scene: &MobilScene<S>,
    mobil: &MobilParams<S>,
    idm: &IdmParams<S>,
) -> LaneChange {
    let left = scene.left.as_ref().and_then(|t| mobil_incentive(scene, t, mobil, idm));
    let right = scene.right.as_ref().and_then(|t| mobil_incentive(scene, t, mobil, idm));
    let mut best = (LaneChange::Stay, mobil.a_threshold);
    for (choice, gain) in [(LaneChange::Left, left), (LaneChange::Right, right)] {
        if let Some(g) = gain {
            if g > best.1 {
                best = (choice, g);
            }
        }
    }
    best.0
}
