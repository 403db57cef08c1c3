//! End-to-end acceptance checks. Each test prints one `criterion N:` line
//! before asserting, so the test output doubles as a scorecard.

use ldpd_core::sim::models::{LaneNeighbors, MobilScene};
use ldpd_core::sim::*;
use ldpd_core::teacher::ttcp::{delta_ttcp, SPEED_FLOOR};
use ldpd_core::teacher::*;
use ldpd_core::testkit::random_scene;
use ldpd_harness::*;
use ldpd_llm::*;
use ldpd_marl::loss::{actor_loss, critic_loss, KlItem, PgItem};
use ldpd_marl::policy::teacher_distribution;
use ldpd_marl::seeds::{derive_seed, Stream};
use ldpd_marl::{imitation_rate, Architecture, Mlp, RolloutPolicy, TrainConfig, Trainer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

/// Written to the raw stderr handle so the line shows even when the test
/// harness captures output.
fn verdict(n: usize, pass: bool, detail: impl std::fmt::Display) -> bool {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

// ---------------------------------------------------------------- 1

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

fn central_diff(params: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-6;
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn random_net(rng: &mut ChaCha8Rng, output: usize) -> Mlp<f64> {
    let input = rng.random_range(2..7);
    let hidden: Vec<usize> = (0..rng.random_range(1..3)).map(|_| rng.random_range(2..8)).collect();
    Mlp::random(Architecture::new(input, &hidden, output), 1.0, rng)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn with_params(net: &Mlp<f64>, p: &[f64]) -> Mlp<f64> {
    Mlp { arch: net.arch.clone(), params: p.to_vec() }
}

#[test]
fn criterion_01_gradients_match_finite_differences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let nets = 150;
    for _ in 0..nets {
        let actor = random_net(&mut rng, Action::COUNT);
        let obs: Vec<Vec<f64>> = (0..4).map(|_| random_vec(&mut rng, actor.arch.input)).collect();
        let pg: Vec<PgItem<'_, f64>> = obs[..2]
            .iter()
            .map(|o| PgItem { obs: o, action: rng.random_range(0..5), advantage: rng.random_range(-3.0..3.0) })
            .collect();
        let kl: Vec<KlItem<'_, f64>> = obs[2..]
            .iter()
            .map(|o| KlItem { obs: o, teacher: teacher_distribution(Action::ALL[rng.random_range(0..5)], 0.05) })
            .collect();
        let lambda = rng.random_range(0.0..2.0);
        let analytic = actor_loss(&actor, &pg, &kl, lambda).unwrap().grad;
        let numeric = central_diff(&actor.params, |p| actor_loss(&with_params(&actor, p), &pg, &kl, lambda).unwrap().loss);
        worst = worst.max(rel_err(&analytic, &numeric));

        let critic = random_net(&mut rng, 1);
        let cobs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, critic.arch.input)).collect();
        let batch: Vec<(&[f64], f64)> = cobs.iter().map(|o| (o.as_slice(), rng.random_range(-5.0..5.0))).collect();
        let analytic = critic_loss(&critic, &batch).unwrap().grad;
        let numeric = central_diff(&critic.params, |p| critic_loss(&with_params(&critic, p), &batch).unwrap().loss);
        worst = worst.max(rel_err(&analytic, &numeric));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-4 && secs < 60.0;
    assert!(verdict(1, pass, format!("{nets} actor + {nets} critic nets, worst rel err {worst:.2e}, {secs:.1}s")));
}

// ---------------------------------------------------------------- 2

/// Independent rollout: the scene is stepped through the public episode
/// API with the candidate joint action first and cruise afterwards.
fn oracle_rollout(env: &Env, joint: &JointAction, horizon: usize) -> Vec<Vec<VehicleState>> {
    let mut config = env.config().clone();
    config.time_limit = f64::INFINITY;
    let mut state = env.state().clone();
    state.done = false;
    let mut sim = Env::from_state(config, state).unwrap();
    let mut frames = Vec::new();
    for k in 0..horizon {
        if !sim.is_done() {
            let step: JointAction = sim
                .state()
                .live_cavs()
                .into_iter()
                .map(|id| (id, if k == 0 { joint.get(&id).copied().unwrap_or(Action::Cruise) } else { Action::Cruise }))
                .collect();
            sim.step(&step).unwrap();
        }
        frames.push(sim.state().vehicles.clone());
    }
    frames
}

fn oracle_margin(frame: &[VehicleState], origin: &VehicleState, action: Action, road: &RoadNetwork) -> f64 {
    let Some(ego) = frame.iter().find(|v| v.id == origin.id) else { return f64::INFINITY };
    if ego.status == Status::Crashed {
        return 0.0;
    }
    if ego.status == Status::Exited {
        return f64::INFINITY;
    }
    let ramp = road.ramp();
    let lane_end = road.merge_end + ego.length / 2.0;
    let nearest = |lane: LaneId| {
        let mut d = f64::INFINITY;
        for v in frame {
            if v.id != ego.id && v.status != Status::Exited && v.lane == lane {
                d = d.min((v.x - ego.x).abs());
            }
        }
        if lane == ramp {
            d = d.min((lane_end - ego.x).abs());
        }
        d
    };
    let target = match action {
        Action::ChangeLeft => road.left_of(origin.lane),
        Action::ChangeRight => road.right_of(origin.lane),
        _ => None,
    };
    if let Some(t) = target {
        return nearest(t).min(nearest(origin.lane));
    }
    let mut gap = f64::INFINITY;
    for v in frame {
        if v.id != ego.id && v.status != Status::Exited && v.lane == ego.lane && v.x > ego.x {
            gap = gap.min(v.x - ego.x);
        }
    }
    if ego.lane == ramp {
        gap = gap.min(lane_end - ego.x);
    }
    gap
}

fn oracle_correct(env: &Env, cav: VehicleId, available: &[Action], base: &JointAction, horizon: usize) -> (Action, Vec<(Action, f64)>) {
    let origin = env.state().vehicle(cav).unwrap().clone();
    let mut candidates: Vec<Action> = Action::ALL.iter().copied().filter(|a| available.contains(a)).collect();
    if candidates.is_empty() {
        candidates.push(Action::SlowDown);
    }
    let mut scored = Vec::new();
    for a in candidates {
        let mut joint = base.clone();
        joint.insert(cav, a);
        let frames = oracle_rollout(env, &joint, horizon);
        let m = frames.iter().map(|f| oracle_margin(f, &origin, a, env.road())).fold(f64::INFINITY, f64::min);
        scored.push((a, m));
    }
    // first maximum in index order
    let mut best = scored[0];
    for s in &scored[1..] {
        if s.1 > best.1 {
            best = *s;
        }
    }
    (best.0, scored)
}

#[test]
fn criterion_02_safety_checker_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let scenes = 1200;
    let mut mismatches = 0;
    let mut ties = 0;
    for i in 0..scenes {
        let scenario = if i % 2 == 0 { 1 } else { 2 };
        let env = random_scene(&mut rng, scenario, 4);
        let live = env.state().live_cavs();
        let cav = live[rng.random_range(0..live.len())];
        let mut base = JointAction::new();
        for &other in live.iter().filter(|&&o| o != cav) {
            let opts = env.available_actions(other);
            base.insert(other, opts[rng.random_range(0..opts.len())]);
        }
        let full = env.available_actions(cav);
        // occasionally restrict the candidate set, down to nothing
        let available: Vec<Action> = match rng.random_range(0..6) {
            0 => full.iter().copied().filter(|_| rng.random_bool(0.5)).collect(),
            _ => full,
        };
        let got = correct_action(&env, cav, &available, &base, 3);
        let (want, margins) = oracle_correct(&env, cav, &available, &base, 3);
        if got.action != want || got.margins != margins {
            mismatches += 1;
        }
        let top = margins.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
        ties += usize::from(margins.iter().filter(|m| m.1 == top).count() > 1);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = mismatches == 0 && secs < 120.0;
    assert!(verdict(2, pass, format!("{scenes} scenes, {mismatches} mismatches, {ties} tied argmaxes, {secs:.1}s")));
}

// ---------------------------------------------------------------- 3

fn ramp_start(road: &RoadNetwork) -> f64 {
    road.lane(road.ramp()).unwrap().start
}

fn place(road: &RoadNetwork, id: u32, kind: VehicleKind, x: f64, lane: u8, speed: f64) -> VehicleState {
    let y = road.lane(LaneId(lane)).unwrap().center_y;
    VehicleState::new(VehicleId(id), kind, x, y, speed, LaneId(lane))
}

#[test]
fn criterion_03_ttcp_and_priority_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut failures = Vec::new();
    for _ in 0..5000 {
        let (di, vi, dj, vj): (f64, f64, f64, f64) = (rng.random_range(0.0..300.0), rng.random_range(0.0..35.0), rng.random_range(0.0..300.0), rng.random_range(0.0..35.0));
        let ab = delta_ttcp(di, vi, dj, vj).unwrap();
        let ba = delta_ttcp(dj, vj, di, vi).unwrap();
        if ab.delta != ba.delta || ab.delta < 0.0 {
            failures.push(format!("symmetry/sign at {di},{vi},{dj},{vj}"));
        }
        let expected = (di / vi.max(SPEED_FLOOR) - dj / vj.max(SPEED_FLOOR)).abs();
        if (ab.delta - expected).abs() > 1e-12 * expected.max(1.0) {
            failures.push(format!("value at {di},{vi},{dj},{vj}"));
        }
        if delta_ttcp(di, vi, di, vi).unwrap().delta != 0.0 {
            failures.push("identical pair".into());
        }
    }
    if delta_ttcp(0.0, 12.0, 0.0, 3.0).unwrap().delta != 0.0 || delta_ttcp(40.0, 20.0, 20.0, 10.0).unwrap().delta != 0.0 {
        failures.push("zero cases".into());
    }
    if delta_ttcp(-1.0, 10.0, 5.0, 10.0).is_ok() || delta_ttcp(5.0, 10.0, -0.5, 10.0).is_ok() {
        failures.push("negative distance accepted".into());
    }

    let config = EnvConfig::new(1, Density::Easy);
    let road = RoadNetwork::with_geometry(1, &config.geometry).unwrap();
    let params = PriorityParams { noise_std: 0.0, ..PriorityParams::default() };
    assert_eq!(params.alpha, [1.0, 1.0, 1.0]);
    let length = road.merge_end - ramp_start(&road);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let x = rng.random_range(20.0..250.0);
        let gap = rng.random_range(2.0..50.0);
        let v = rng.random_range(1.0..30.0);
        let ego = place(&road, 1, VehicleKind::Cav, x, 0, v);
        let lead = place(&road, 2, VehicleKind::Hv, x + gap + VehicleState::DEFAULT_LENGTH, 0, 20.0);
        let beside = place(&road, 3, VehicleKind::Cav, x + rng.random_range(-30.0..30.0), 1, v);
        let env = Env::with_vehicles(config.clone(), vec![ego, lead, beside]).unwrap();
        let got = ldpd_core::teacher::priority::priority_score(&env, VehicleId(1), &params, &mut rng).unwrap();
        let p_h = (-(gap / (1.2 * v)).ln()).clamp(-5.0, 5.0);
        let hand = 0.5 + (x - ramp_start(&road)) / length + p_h;
        worst = worst.max((got - hand).abs());
        // a through-lane CAV with no leader scores only the headway floor
        let through = ldpd_core::teacher::priority::priority_score(&env, VehicleId(3), &params, &mut rng).unwrap();
        worst = worst.max((through - (-5.0)).abs());
    }
    if worst > 1e-9 {
        failures.push(format!("priority error {worst:.2e}"));
    }
    let pass = failures.is_empty();
    assert!(verdict(3, pass, format!("5000 TTCP draws, 2000 priority scenes, worst priority error {worst:.1e} {failures:?}")));
}

// ---------------------------------------------------------------- 4

fn params_of<P>(t: &Trainer<P>) -> Vec<Vec<f64>> {
    t.agents.iter().flat_map(|a| [a.actor.params.clone(), a.critic.params.clone()]).collect()
}

#[test]
fn criterion_04_zero_lambda_is_plain_actor_critic() {
    let episodes = 30;
    let base = |teaching: usize, selfe: usize| {
        let mut c = TrainConfig::new(EnvConfig::new(1, Density::Easy), 44);
        c.teaching_episodes = teaching;
        c.self_episodes = selfe;
        c.eval_interval = 10;
        c
    };
    let mut dc = base(episodes, 0);
    dc.lambda0 = 0.0;
    dc.rollout = RolloutPolicy::Student;
    let mut distill = Trainer::new(dc, Some(Teacher::new(TeacherConfig::default(), OraclePlanner))).unwrap();
    let mut plain: Trainer<OraclePlanner> = Trainer::new(base(0, episodes), None).unwrap();
    let mut identical = 0;
    for _ in 0..episodes {
        distill.train_episode().unwrap();
        plain.train_episode().unwrap();
        identical += usize::from(params_of(&distill) == params_of(&plain));
    }
    let pass = identical == episodes && distill.log == plain.log;
    assert!(verdict(4, pass, format!("{identical}/{episodes} episodes with bit-identical parameters")));
}

// ---------------------------------------------------------------- 5

#[test]
fn criterion_05_students_imitate_the_teacher() {
    let seed = 1;
    let mut c = TrainConfig::new(EnvConfig::new(1, Density::Easy), seed);
    c.teaching_episodes = 200;
    c.self_episodes = 0;
    c.lambda0 = 1.0;
    let mut t = Trainer::new(c.clone(), Some(Teacher::new(TeacherConfig::default(), OraclePlanner))).unwrap();
    t.run(|_| Ok(())).unwrap();
    let held_out: Vec<u64> = (0..30).map(|j| derive_seed(seed, Stream::Holdout, j)).collect();
    let mut teacher = Teacher::new(TeacherConfig::default(), OraclePlanner);
    let (hits, total) = imitation_rate(&t.agents, &mut teacher, &c.env, &held_out).unwrap();
    let rate = hits as f64 / total as f64;
    let pass = rate >= 0.90;
    assert!(verdict(5, pass, format!("agreement {rate:.3} on {total} held-out teacher states (target 0.90)")));
}

// ---------------------------------------------------------------- 6

fn efficacy_config(teaching: usize, selfe: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.seeds = vec![1, 2, 3];
    cfg.train.teaching_episodes = teaching;
    cfg.train.self_episodes = selfe;
    cfg.final_eval_episodes = 100;
    cfg.validate().unwrap();
    cfg
}

fn seed_means(out: &TrainingOutput) -> (f64, f64) {
    let report = Report::from_csv(&std::fs::read_to_string(&out.report.as_ref().unwrap().csv).unwrap()).unwrap();
    let n = report.runs.len() as f64;
    (report.runs.iter().map(|r| r.reward).sum::<f64>() / n, report.runs.iter().map(|r| r.collision_rate).sum::<f64>() / n)
}

#[test]
fn criterion_06_distillation_beats_plain_learning() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let distilled = run_training(&efficacy_config(500, 1500), &dir.path().join("distilled")).unwrap();
    let baseline = run_training(&efficacy_config(0, 2000), &dir.path().join("baseline")).unwrap();
    let (r_d, c_d) = seed_means(&distilled);
    let (r_b, c_b) = seed_means(&baseline);
    // 1.2x for a positive baseline; a 20% improvement on |baseline| otherwise
    let needed = r_b + 0.2 * r_b.abs();
    let a = c_d <= 0.05;
    let b = r_d >= needed;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "(a) collision {c_d:.3} vs 0.05 {} ; (b) reward {r_d:.2} vs needed {needed:.2} (baseline {r_b:.2}, collision {c_b:.3}) {} ; {secs:.0}s",
        if a { "ok" } else { "missed" },
        if b { "ok" } else { "missed" },
    );
    assert!(verdict(6, a && b, detail));
}

// ---------------------------------------------------------------- 7

fn tiny(seeds: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "seeds = {seeds}\nteaching_episodes = 6\nself_episodes = 6\neval_interval = 3\neval_episodes = 2\nfinal_eval_episodes = 6\nhidden = 16, 16\n"
    ))
    .unwrap()
}

fn artifacts(o: &TrainingOutput) -> Vec<Vec<u8>> {
    let report = o.report.as_ref().unwrap();
    let mut files = vec![&report.csv, &report.json, &o.mean_curve, &o.plot];
    for r in &o.runs {
        files.push(&r.checkpoint);
        files.push(&r.curve);
    }
    files.into_iter().map(|p| std::fs::read(p).unwrap()).collect()
}

/// Cruise for every CAV the prompt asks about.
struct Cruise;

impl Transport for Cruise {
    fn post_json(&self, _: &str, _: &[(String, String)], body: &serde_json::Value) -> std::result::Result<HttpResponse, TransportError> {
        let sys = body["messages"][0]["content"].as_str().unwrap();
        let ids = sys.lines().find_map(|l| l.strip_prefix("Decide for: ")).unwrap().trim_end_matches('.');
        let map: Vec<String> = ids.split(", ").map(|id| format!("\"{id}\": \"cruise\"")).collect();
        let content = format!("ACTIONS: {{{}}}", map.join(", "));
        let body = serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] });
        Ok(HttpResponse { status: 200, body: body.to_string() })
    }
}

#[test]
fn criterion_07_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny("1, 2");
    let a = run_training(&cfg, &dir.path().join("a")).unwrap();
    let b = run_training(&cfg, &dir.path().join("b")).unwrap();
    let oracle_same = artifacts(&a) == artifacts(&b);

    let store_path = dir.path().join("session.jsonl");
    let mut llm = tiny("1, 2");
    llm.set("backend", "llm").unwrap();
    let store = Arc::new(SessionStore::open(&store_path).unwrap());
    let recorder = || {
        let client = LlmClient::new(LlmConfig::default(), Mode::Record, Arc::new(Cruise), Some(store.clone()))?;
        Ok(AnyPlanner::Llm(Box::new(LlmPlanner::new(client))))
    };
    run_training_with(&llm, &dir.path().join("rec"), None, &recorder).unwrap();
    llm.set("llm_mode", "replay").unwrap();
    llm.set("llm_store", store_path.to_str().unwrap()).unwrap();
    llm.set("llm_endpoint", "http://127.0.0.1:9").unwrap();
    let r1 = run_training(&llm, &dir.path().join("r1")).unwrap();
    let r2 = run_training(&llm, &dir.path().join("r2")).unwrap();
    let replay_same = artifacts(&r1) == artifacts(&r2);

    let pass = oracle_same && replay_same;
    assert!(verdict(7, pass, format!("oracle runs identical: {oracle_same}; replay-mode LLM runs identical: {replay_same}")));
}

// ---------------------------------------------------------------- 8

/// Textbook IDM, written out independently of the simulator.
fn idm_reference(v: f64, leader: Option<(f64, f64)>, p: &IdmParams<f64>) -> f64 {
    let v = v.max(0.0);
    let mut a = 1.0 - (v / p.v0).powf(p.delta);
    if let Some((gap, lead_speed)) = leader {
        if gap <= 0.0 {
            return -p.b_hard;
        }
        let s_star = p.s0 + (v * p.time_headway + v * (v - lead_speed) / (2.0 * (p.a_max * p.b).sqrt())).max(0.0);
        a -= (s_star / gap).powi(2);
    }
    (p.a_max * a).clamp(-p.b_hard, p.a_max)
}

fn maybe_neighbor(rng: &mut ChaCha8Rng) -> Option<Neighbor<f64>> {
    rng.random_bool(0.8).then(|| Neighbor { gap: rng.random_range(-2.0..80.0), speed: rng.random_range(0.0..35.0) })
}

fn lane_neighbors(rng: &mut ChaCha8Rng) -> LaneNeighbors<f64> {
    LaneNeighbors { leader: maybe_neighbor(rng), follower: maybe_neighbor(rng) }
}

#[test]
fn criterion_08_idm_and_mobil_sanity() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut failures = Vec::new();
    let idm = IdmParams::default();
    if idm_acceleration(idm.v0, None, &idm) != 0.0 {
        failures.push("free-road equilibrium".to_string());
    }
    for _ in 0..10_000 {
        let p = IdmParams {
            v0: rng.random_range(5.0..40.0),
            time_headway: rng.random_range(0.5..2.5),
            s0: rng.random_range(0.5..4.0),
            a_max: rng.random_range(0.5..4.0),
            b: rng.random_range(0.5..4.0),
            delta: 4.0,
            b_hard: rng.random_range(4.0..9.0),
        };
        if idm_acceleration(p.v0, None, &p) != 0.0 {
            failures.push(format!("a(v0) != 0 for {p:?}"));
        }
        let v = rng.random_range(0.0..45.0);
        let leader = maybe_neighbor(&mut rng);
        let a = idm_acceleration(v, leader, &p);
        if a > p.a_max || (a - idm_reference(v, leader.map(|l| (l.gap, l.speed)), &p)).abs() > 1e-12 {
            failures.push(format!("IDM at v={v} leader={leader:?}"));
        }
    }

    let mobil = MobilParams::default();
    let mut changes = 0;
    for _ in 0..10_000 {
        let scene = MobilScene {
            ego_speed: rng.random_range(0.0..35.0),
            ego_length: VehicleState::DEFAULT_LENGTH,
            current: lane_neighbors(&mut rng),
            left: rng.random_bool(0.7).then(|| lane_neighbors(&mut rng)),
            right: rng.random_bool(0.7).then(|| lane_neighbors(&mut rng)),
        };
        let target = match mobil_decide(&scene, &mobil, &idm) {
            LaneChange::Stay => continue,
            LaneChange::Left => scene.left.unwrap(),
            LaneChange::Right => scene.right.unwrap(),
        };
        changes += 1;
        if let Some(f) = target.follower {
            let after = idm_reference(f.speed, Some((f.gap, scene.ego_speed)), &idm);
            if after < -mobil.b_safe {
                failures.push(format!("follower forced to {after:.2} m/s^2"));
            }
        }
    }
    let pass = failures.is_empty() && changes > 100;
    assert!(verdict(8, pass, format!("10000 IDM draws, 10000 MOBIL scenes with {changes} lane changes, failures {failures:?}")));
}

// ---------------------------------------------------------------- 9

#[derive(Default)]
struct CountingCruise {
    calls: AtomicUsize,
}

impl Transport for CountingCruise {
    fn post_json(&self, url: &str, h: &[(String, String)], body: &serde_json::Value) -> std::result::Result<HttpResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Cruise.post_json(url, h, body)
    }
}

#[test]
fn criterion_09_llm_protocol() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut roundtrip_failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..8);
        let mut joint = JointAction::new();
        while joint.len() < n {
            joint.insert(VehicleId(rng.random_range(1..60)), Action::ALL[rng.random_range(0..5)]);
        }
        let live: Vec<VehicleId> = joint.keys().copied().collect();
        let text = format!("Reasoning about the merge.\n{}", format_actions(&joint));
        if parse_decision(&text, &live).ok() != Some(joint) {
            roundtrip_failures += 1;
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.jsonl");
    let quick = LlmConfig { backoff: std::time::Duration::ZERO, ..LlmConfig::default() };
    let scenes: Vec<Env> = (0..25).map(|s| random_scene(&mut ChaCha8Rng::seed_from_u64(s), 1 + (s % 2) as u8, 5)).collect();
    let decide_all = |client: LlmClient| {
        let mut teacher = Teacher::new(TeacherConfig::default(), LlmPlanner::new(client));
        scenes.iter().enumerate().map(|(i, e)| teacher.decide(e, &mut ChaCha8Rng::seed_from_u64(i as u64))).collect::<Vec<_>>()
    };
    let live = Arc::new(CountingCruise::default());
    let recorded = decide_all(LlmClient::new(quick.clone(), Mode::Record, live.clone(), Some(Arc::new(SessionStore::open(&path).unwrap()))).unwrap());
    let offline = Arc::new(CannedTransport::new());
    let replayed = decide_all(
        LlmClient::new(quick.clone(), Mode::Replay, offline.clone(), Some(Arc::new(SessionStore::open_existing(&path).unwrap()))).unwrap(),
    );
    let replay_ok = recorded == replayed && offline.calls() == 0 && live.calls.load(Ordering::SeqCst) == scenes.len();

    let env = random_scene(&mut ChaCha8Rng::seed_from_u64(7), 1, 4);
    let analysis = analyse(&env, &TeacherConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
    let ctx = ToolContext { env: &env, descriptions: &analysis.descriptions, conflicts: &analysis.conflicts };
    let mut depth_ok = true;
    for max in 0..6 {
        let t = Arc::new(CannedTransport::new());
        for _ in 0..10 {
            t.push_text("Action: conflict_check()");
        }
        let client = LlmClient::new(quick.clone(), Mode::Live, t.clone(), None).unwrap();
        let out = run_react(&client, render_prompt(&analysis.descriptions, &analysis.conflicts), &default_tools(), &ctx, max);
        depth_ok &= matches!(out, Err(LlmError::DepthExceeded(m)) if m == max) && t.calls() == max + 1;
    }

    let pass = roundtrip_failures == 0 && replay_ok && depth_ok;
    assert!(verdict(
        9,
        pass,
        format!("round-trip failures {roundtrip_failures}/1000; replay reproduces {} decisions with {} calls; depth bound held: {depth_ok}", scenes.len(), offline.calls()),
    ));
}

// ---------------------------------------------------------------- 10

#[test]
fn criterion_10_report_schema_and_golden_files() {
    let expected = ["reward", "collision_rate", "avg_speed", "avg_pet", "success_rate"];
    let row = |seed: u64, trained: Density, reward: f64, pet: Option<f64>| EvalRow {
        scenario: 1,
        trained_density: trained,
        density: Density::Easy,
        seed,
        reward,
        collision_rate: 0.05,
        avg_speed: 26.5,
        avg_pet: pet,
        success_rate: 0.75,
    };
    let rows = vec![row(1, Density::Easy, 80.5, Some(19.0)), row(2, Density::Easy, 60.25, None), row(1, Density::Hard, 62.5, Some(12.5))];
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&rows, dir.path(), "report").unwrap();
    let csv = std::fs::read_to_string(&files.csv).unwrap();
    let json = std::fs::read_to_string(&files.json).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let metric_header = &header[KEY_COLUMNS.len()..];
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let json_metrics: Vec<&str> = doc["metrics"].as_array().unwrap().iter().map(|m| m.as_str().unwrap()).collect();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let csv_golden = csv == std::fs::read_to_string(golden.join("report.csv")).unwrap();
    let json_golden = json == std::fs::read_to_string(golden.join("report.json")).unwrap();
    let pass = METRIC_COLUMNS == expected && metric_header == expected && json_metrics == expected && csv_golden && json_golden;
    assert!(verdict(10, pass, format!("metric columns {metric_header:?}; csv golden {csv_golden}; json golden {json_golden}")));
}
