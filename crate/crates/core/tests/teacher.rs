use ldpd_core::sim::*;
use ldpd_core::teacher::*;
use ldpd_core::testkit::random_scene;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn at(id: u32, kind: VehicleKind, x: f64, lane: u8, speed: f64, scenario: u8) -> VehicleState {
    let road = RoadNetwork::build(scenario).unwrap();
    let y = road.lane(LaneId(lane)).unwrap().center_y;
    VehicleState::new(VehicleId(id), kind, x, y, speed, LaneId(lane))
}

fn scene(scenario: u8, vs: Vec<VehicleState>) -> Env {
    Env::with_vehicles(EnvConfig::new(scenario, Density::Easy), vs).unwrap()
}

fn correct(env: &Env, id: u32) -> Correction {
    let id = VehicleId(id);
    correct_action(env, id, &env.available_actions(id), &JointAction::new(), 3)
}

use ldpd_core::teacher::safety::Correction;

#[test]
fn identical_margins_resolve_to_slow_down() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 50.0, 1, 20.0, 1)]);
    let c = correct(&env, 1);
    assert!(c.margins.iter().all(|(_, m)| m.is_infinite()));
    assert_eq!(c.action, Action::SlowDown);
}

#[test]
fn stopped_leader_far_ahead_prefers_slowing() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 100.0, 1, 25.0, 1), at(2, VehicleKind::Hv, 170.0, 1, 0.0, 1)]);
    let c = correct(&env, 1);
    assert_eq!(c.action, Action::SlowDown);
    let slow = c.margins[0].1;
    assert!(c.margins.iter().all(|(_, m)| *m <= slow));
}

#[test]
fn stopped_leader_with_free_adjacent_lane_changes_lane() {
    let env = scene(2, vec![at(1, VehicleKind::Cav, 100.0, 1, 25.0, 2), at(2, VehicleKind::Hv, 130.0, 1, 0.0, 2)]);
    let c = correct(&env, 1);
    assert_eq!(c.action, Action::ChangeLeft);
}

#[test]
fn keep_lane_margin_is_gap_to_leader() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 100.0, 1, 20.0, 1), at(2, VehicleKind::Cav, 130.0, 1, 20.0, 1)]);
    let mut j = JointAction::new();
    j.insert(VehicleId(1), Action::Cruise);
    j.insert(VehicleId(2), Action::Cruise);
    let traj = predict_trajectories(&env, &j, 2);
    let origin = env.state().vehicle(VehicleId(1)).unwrap();
    for k in 1..=2 {
        let expected = traj.position(VehicleId(2), k).unwrap() - traj.position(VehicleId(1), k).unwrap();
        assert!((safety_margin(&traj, origin, Action::Cruise, k, env.road()) - expected).abs() < 1e-12);
    }
}

#[test]
fn lane_change_margin_is_nearest_offset() {
    let env = scene(
        2,
        vec![
            at(1, VehicleKind::Cav, 100.0, 1, 20.0, 2),
            at(2, VehicleKind::Cav, 112.0, 2, 20.0, 2),
            at(3, VehicleKind::Cav, 92.0, 2, 20.0, 2),
        ],
    );
    let j: JointAction = [1, 2, 3].into_iter().map(|i| (VehicleId(i), Action::Cruise)).collect();
    let traj = predict_trajectories(&env, &j, 1);
    let origin = env.state().vehicle(VehicleId(1)).unwrap();
    let m = safety_margin(&traj, origin, Action::ChangeLeft, 1, env.road());
    assert!((m - 8.0).abs() < 1e-9, "{m}");
}

#[test]
fn empty_road_margin_is_infinite() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 50.0, 1, 20.0, 1)]);
    let traj = predict_trajectories(&env, &JointAction::new(), 3);
    let origin = env.state().vehicle(VehicleId(1)).unwrap();
    assert!(safety_margin(&traj, origin, Action::Cruise, 3, env.road()).is_infinite());
}

#[test]
fn conflict_free_plan_is_untouched() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 50.0, 1, 25.0, 1), at(2, VehicleKind::Cav, 150.0, 1, 25.0, 1)]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pri = PriorityList::build(&env, &PriorityParams::default(), &mut rng);
    let plan: JointAction = [(VehicleId(1), Action::Cruise), (VehicleId(2), Action::Cruise)].into();
    let out = safety_check(&plan, &env, &pri, 3);
    assert_eq!(out.actions, plan);
    assert!(out.provenance.values().all(|p| *p == Provenance::Planner));
}

#[test]
fn converging_merge_corrects_lower_priority() {
    // Ramp and main vehicles reaching the same spot together.
    let env = scene(1, vec![at(1, VehicleKind::Cav, 250.0, 0, 20.0, 1), at(2, VehicleKind::Cav, 246.0, 1, 20.0, 1)]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pri = PriorityList::build(&env, &PriorityParams::default(), &mut rng);
    let plan: JointAction = [(VehicleId(1), Action::ChangeLeft), (VehicleId(2), Action::Cruise)].into();
    assert!(!predict_trajectories(&env, &plan, 3).crashed.is_empty());
    let out = safety_check(&plan, &env, &pri, 3);
    let top = pri.order().next().unwrap();
    let low = if top == VehicleId(1) { VehicleId(2) } else { VehicleId(1) };
    assert_eq!(out.provenance[&top], Provenance::Planner);
    assert_eq!(out.provenance[&low], Provenance::SafetyCorrected);
    assert!(predict_trajectories(&env, &out.actions, 3).crashed.is_empty());
}

#[test]
fn oracle_follows_intentions_without_conflicts() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 20.0, 1, 30.0, 1), at(2, VehicleKind::Cav, 400.0, 1, 30.0, 1)]);
    let mut t = Teacher::new(TeacherConfig::default(), OraclePlanner);
    let d = t.decide(&env, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(d.actions.values().copied().collect::<Vec<_>>(), vec![Action::Cruise, Action::Cruise]);
    assert_eq!(d.corrections(), 0);
    assert!(d.fallback.is_none());
}

#[test]
fn oracle_slows_the_yielding_cav() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 100.0, 1, 30.0, 1), at(2, VehicleKind::Cav, 140.0, 1, 30.0, 1)]);
    let descs: Vec<_> = [1, 2].iter().map(|i| enhance_observation(&env, VehicleId(*i)).unwrap()).collect();
    let thresholds = RiskThresholds { high_delta: 10.0, low_delta: 20.0, horizon: 100.0 };
    let report = conflict_check(&descs, &env, &thresholds);
    assert!(report.high_risk().count() > 0);
    let pri = PriorityList::build(&env, &PriorityParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
    let plan = oracle_plan(&descs, &report, &env, &pri);
    assert_eq!(plan[&VehicleId(1)], Action::SlowDown);
    assert_eq!(plan[&VehicleId(2)], Action::Cruise);
}

struct Failing;

impl Planner for Failing {
    fn name(&self) -> &str {
        "failing"
    }
    fn plan(&mut self, _: &PlanningContext<'_>) -> Result<JointAction, PlannerError> {
        Err(PlannerError::Backend("down".into()))
    }
}

#[test]
fn failing_backend_falls_back_to_oracle() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 20.0, 1, 25.0, 1)]);
    let mut failing = Teacher::new(TeacherConfig::default(), Failing);
    let mut oracle = Teacher::new(TeacherConfig::default(), OraclePlanner);
    let a = failing.decide(&env, &mut ChaCha8Rng::seed_from_u64(5));
    let b = oracle.decide(&env, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(a.actions, b.actions);
    assert!(a.fallback.as_deref().unwrap().contains("down"));
}

struct Fixed(Action);

impl Planner for Fixed {
    fn name(&self) -> &str {
        "fixed"
    }
    fn plan(&mut self, ctx: &PlanningContext<'_>) -> Result<JointAction, PlannerError> {
        Ok(ctx.env.state().live_cavs().into_iter().map(|id| (id, self.0)).collect())
    }
}

#[test]
fn unavailable_planned_action_is_substituted() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 20.0, 1, 25.0, 1)]);
    let mut t = Teacher::new(TeacherConfig::default(), Fixed(Action::ChangeLeft));
    let d = t.decide(&env, &mut ChaCha8Rng::seed_from_u64(0));
    let a = d.actions[&VehicleId(1)];
    assert!(env.available_actions(VehicleId(1)).contains(&a));
    assert_eq!(d.provenance[&VehicleId(1)], Provenance::SafetyCorrected);
}

#[test]
fn decision_json_uses_labels() {
    let env = scene(1, vec![at(1, VehicleKind::Cav, 20.0, 1, 30.0, 1)]);
    let mut t = Teacher::new(TeacherConfig::default(), OraclePlanner);
    let d = t.decide(&env, &mut ChaCha8Rng::seed_from_u64(0));
    let j = d.to_json();
    assert_eq!(j["actions"]["c1"], "cruise");
    assert_eq!(j["backend"], "oracle");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn safety_check_is_idempotent(seed in any::<u64>(), scenario in 1u8..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = random_scene(&mut rng, scenario, 4);
        let mut t = Teacher::new(TeacherConfig::default(), OraclePlanner);
        let d = t.decide(&env, &mut rng);
        let again = safety_check(&d.actions, &env, &d.priorities, 3);
        prop_assert_eq!(again.actions, d.actions);
    }

    #[test]
    fn decisions_cover_live_cavs_with_available_actions(seed in any::<u64>(), scenario in 1u8..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = random_scene(&mut rng, scenario, 4);
        let mut t = Teacher::new(TeacherConfig::default(), OraclePlanner);
        let d = t.decide(&env, &mut rng);
        let live = env.state().live_cavs();
        prop_assert_eq!(d.actions.keys().copied().collect::<Vec<_>>(), live.clone());
        for id in live {
            prop_assert!(env.available_actions(id).contains(&d.actions[&id]));
        }
    }

    #[test]
    fn correction_maximises_min_margin(seed in any::<u64>(), scenario in 1u8..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let env = random_scene(&mut rng, scenario, 4);
        for id in env.state().live_cavs() {
            let c = correct_action(&env, id, &env.available_actions(id), &JointAction::new(), 3);
            let best = c.margins.iter().map(|(_, m)| *m).fold(f64::NEG_INFINITY, f64::max);
            let first = c.margins.iter().find(|(_, m)| *m == best).unwrap().0;
            prop_assert_eq!(c.action, first);
        }
    }
}

#[test]
fn merge_lane_cav_near_end_outranks_main_road_cav() {
    // Both have a leader 30 m ahead at the same speed.
    let env = scene(
        1,
        vec![
            at(1, VehicleKind::Cav, 280.0, 0, 20.0, 1),
            at(2, VehicleKind::Hv, 310.0, 0, 20.0, 1),
            at(3, VehicleKind::Cav, 100.0, 1, 20.0, 1),
            at(4, VehicleKind::Hv, 130.0, 1, 20.0, 1),
        ],
    );
    let pri = PriorityList::build(&env, &PriorityParams::default(), &mut ChaCha8Rng::seed_from_u64(9));
    assert!(pri.outranks(VehicleId(1), VehicleId(3)));
}
