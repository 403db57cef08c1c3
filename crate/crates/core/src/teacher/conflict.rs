//! Conflict checking: candidate conflict pairs rated by ΔTTCP.

use super::scene::{intention_in, Intention, ScenarioDescription};
use super::ttcp::delta_ttcp;
use crate::sim::traffic;
use crate::sim::{Env, LaneId, VehicleId, VehicleState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskLevel {
    None,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictKind {
    /// Ramp vehicle merging ahead of or behind a through-lane vehicle.
    Merge,
    /// Follower closing on its leader in a shared lane.
    Following,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskThresholds {
    /// ΔTTCP below which a pair is high risk (s), given both TTCPs are short.
    pub high_delta: f64,
    /// ΔTTCP below which a pair is at least low risk (s).
    pub low_delta: f64,
    /// Both TTCPs must be below this for high risk (s).
    pub horizon: f64,
}

impl Default for RiskThresholds {
    fn default() -> Self {
        Self { high_delta: 2.0, low_delta: 4.0, horizon: 10.0 }
    }
}

impl RiskThresholds {
    pub fn classify(&self, ttcp_a: f64, ttcp_b: f64, delta: f64) -> RiskLevel {
        if delta < self.high_delta && ttcp_a < self.horizon && ttcp_b < self.horizon {
            RiskLevel::High
        } else if delta < self.low_delta {
            RiskLevel::Low
        } else {
            RiskLevel::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub kind: ConflictKind,
    /// For merges the ramp vehicle; for following the follower.
    pub a: VehicleId,
    pub b: VehicleId,
    /// Longitudinal position of the conflict point (m).
    pub point: f64,
    pub ttcp_a: f64,
    pub ttcp_b: f64,
    pub delta: f64,
    pub risk: RiskLevel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConflictReport {
    pub conflicts: Vec<Conflict>,
}

impl ConflictReport {
    pub fn is_empty(&self) -> bool {
        self.conflicts.is_empty()
    }

    pub fn high_risk(&self) -> impl Iterator<Item = &Conflict> {
        self.conflicts.iter().filter(|c| c.risk == RiskLevel::High)
    }
}

/// Rates one pair heading for the same point.
pub fn rate_pair(
    kind: ConflictKind,
    a: &VehicleState,
    b: &VehicleState,
    point: f64,
    thresholds: &RiskThresholds,
) -> Option<Conflict> {
    let t = delta_ttcp(point - a.x, a.speed(), point - b.x, b.speed()).ok()?;
    Some(Conflict {
        kind,
        a: a.id,
        b: b.id,
        point,
        ttcp_a: t.ttcp_i,
        ttcp_b: t.ttcp_j,
        delta: t.delta,
        risk: thresholds.classify(t.ttcp_i, t.ttcp_j, t.delta),
    })
}

/// Retrieves all potential conflicts that involve at least one CAV.
///
/// Merge pairs: a ramp vehicle intending to merge against a vehicle in the
/// merge-target lane that has not yet passed the conflict point (entry
/// point of the ramp vehicle). Following pairs: immediate leader/follower
/// in a shared current or intended lane.
pub fn conflict_check(descriptions: &[ScenarioDescription], env: &Env, thresholds: &RiskThresholds) -> ConflictReport {
    let road = env.road();
    let vehicles: Vec<&VehicleState> = env.state().vehicles.iter().filter(|v| v.is_active()).collect();
    let mut intentions: BTreeMap<VehicleId, Intention> = BTreeMap::new();
    for d in descriptions {
        intentions.extend(d.intentions.iter().map(|(k, v)| (*k, *v)));
    }
    let intent = |v: &VehicleState| intentions.get(&v.id).copied().unwrap_or_else(|| intention_in(env, v));
    let merge_lane = road.merge_target();
    let mut out = Vec::new();

    // merge conflicts
    for r in vehicles.iter().filter(|v| road.is_ramp(v.lane)) {
        if intent(r).lane != merge_lane {
            continue;
        }
        let point = r.x.max(road.merge_start);
        for m in vehicles.iter().filter(|v| v.lane == merge_lane) {
            if !r.is_cav() && !m.is_cav() {
                continue;
            }
            let behind = point - m.x;
            // side by side counts as being at the point
            if behind < -m.length {
                continue;
            }
            let mut probe = (*m).clone();
            probe.x = probe.x.min(point);
            if let Some(c) = rate_pair(ConflictKind::Merge, r, &probe, point, thresholds) {
                out.push(c);
            }
        }
    }

    // following conflicts
    let all = &env.state().vehicles;
    let mut seen = std::collections::BTreeSet::new();
    for f in &vehicles {
        let mut lanes: Vec<LaneId> = vec![f.lane];
        let il = intent(f).lane;
        if il != f.lane && road.transition_open(f.lane, il, f.x) {
            lanes.push(il);
        }
        for lane in lanes {
            let Some((l, _)) = traffic::leader(f, all, lane, road) else { continue };
            if !f.is_cav() && !l.is_cav() {
                continue;
            }
            if !seen.insert((f.id, l.id)) {
                continue;
            }
            if let Some(c) = rate_pair(ConflictKind::Following, f, l, l.x, thresholds) {
                out.push(c);
            }
        }
    }
    ConflictReport { conflicts: out }
}
