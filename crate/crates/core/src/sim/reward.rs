//! Per-CAV step reward: collision, speed, headway and merge-lane terms.

use super::config::{RewardParams, RewardWeights};
use serde::{Deserialize, Serialize};

/// Unweighted reward components of one CAV for one decision step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardTerms {
    /// −1 on the step the vehicle crashed, else 0.
    pub collision: f64,
    /// Speed normalised into [0, 1].
    pub speed: f64,
    /// ln(d / (t_h v)), clipped to [−1, 0]; 0 without a leader.
    pub headway: f64,
    /// Ramp-lingering penalty in [−1, 0].
    pub merge: f64,
}

impl RewardTerms {
    pub fn weighted(&self, w: &RewardWeights) -> f64 {
        w.collision * self.collision + w.speed * self.speed + w.headway * self.headway + w.merge * self.merge
    }
}

/// Quantities of the post-step state the reward depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInput {
    pub crashed_this_step: bool,
    pub speed: f64,
    /// Bumper-to-bumper gap to the leader in the ego lane.
    pub headway_gap: Option<f64>,
    pub on_ramp: bool,
    pub x: f64,
    pub merge_start: f64,
    pub merge_end: f64,
}

pub fn speed_term(speed: f64, p: &RewardParams) -> f64 {
    ((speed - p.speed_low) / (p.speed_high - p.speed_low)).clamp(0.0, 1.0)
}

pub fn headway_term(gap: Option<f64>, speed: f64, p: &RewardParams) -> f64 {
    match gap {
        Some(d) if speed > 0.0 => {
            if d <= 0.0 {
                -1.0
            } else {
                (d / (p.time_headway * speed)).ln().clamp(-1.0, 0.0)
            }
        }
        _ => 0.0,
    }
}

pub fn merge_term(on_ramp: bool, x: f64, merge_start: f64, merge_end: f64) -> f64 {
    if !on_ramp {
        return 0.0;
    }
    let span = 10.0 * (merge_end - merge_start);
    -(-(x - merge_end).powi(2) / span).exp()
}

pub fn reward_terms(input: &RewardInput, p: &RewardParams) -> RewardTerms {
    RewardTerms {
        collision: if input.crashed_this_step { -1.0 } else { 0.0 },
        speed: speed_term(input.speed, p),
        headway: headway_term(input.headway_gap, input.speed, p),
        merge: merge_term(input.on_ramp, input.x, input.merge_start, input.merge_end),
    }
}

pub fn reward(input: &RewardInput, p: &RewardParams) -> f64 {
    reward_terms(input, p).weighted(&p.weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base() -> RewardInput {
        RewardInput {
            crashed_this_step: false,
            speed: 25.0,
            headway_gap: None,
            on_ramp: false,
            x: 100.0,
            merge_start: 220.0,
            merge_end: 310.0,
        }
    }

    #[test]
    fn collision_term_is_minus_weight() {
        let p = RewardParams::default();
        let t = reward_terms(&RewardInput { crashed_this_step: true, ..base() }, &p);
        assert_eq!(t.collision * p.weights.collision, -200.0);
    }

    #[test]
    fn top_speed_off_ramp() {
        let p = RewardParams::default();
        let t = reward_terms(&RewardInput { speed: 32.0, ..base() }, &p);
        assert_eq!(t.speed * p.weights.speed, 1.0);
        assert_eq!(t.merge, 0.0);
        assert_eq!(t.headway, 0.0);
    }

    #[test]
    fn headway_at_desired_time_gap_is_zero() {
        let p = RewardParams::default();
        assert_eq!(headway_term(Some(1.2 * 20.0), 20.0, &p), 0.0);
        assert_eq!(headway_term(Some(0.0), 20.0, &p), -1.0);
        assert!(headway_term(Some(10.0), 20.0, &p) < 0.0);
    }

    #[test]
    fn merge_penalty_peaks_at_lane_end() {
        assert_eq!(merge_term(true, 310.0, 220.0, 310.0), -1.0);
        assert!(merge_term(true, 100.0, 220.0, 310.0) > -0.01);
    }

    proptest! {
        #[test]
        fn reward_is_bounded(
            crashed in any::<bool>(), speed in 0.0..40.0f64, gap in proptest::option::of(-5.0..200.0f64),
            ramp in any::<bool>(), x in 0.0..500.0f64,
        ) {
            let p = RewardParams::default();
            let r = reward(&RewardInput { crashed_this_step: crashed, speed, headway_gap: gap, on_ramp: ramp, x, merge_start: 220.0, merge_end: 310.0 }, &p);
            prop_assert!(r.is_finite());
            prop_assert!(r.abs() <= p.weights.total());
        }
    }
}
