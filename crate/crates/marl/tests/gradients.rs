use ldpd_core::sim::Action;
use ldpd_marl::loss::{actor_loss, critic_loss, KlItem, PgItem};
use ldpd_marl::policy::{softmax, teacher_distribution};
use ldpd_marl::{Architecture, Mlp};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Norm-wise relative error between two gradient vectors.
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
    let input = rng.random_range(2..6);
    let hidden: Vec<usize> = (0..rng.random_range(1..3)).map(|_| rng.random_range(2..7)).collect();
    Mlp::random(Architecture::new(input, &hidden, output), 1.0, rng)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn with_params(net: &Mlp<f64>, p: &[f64]) -> Mlp<f64> {
    Mlp { arch: net.arch.clone(), params: p.to_vec() }
}

#[test]
fn actor_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let net = random_net(&mut rng, 5);
        let obs: Vec<Vec<f64>> = (0..4).map(|_| random_vec(&mut rng, net.arch.input)).collect();
        let pg: Vec<PgItem<'_, f64>> = obs[..2]
            .iter()
            .map(|o| PgItem { obs: o, action: rng.random_range(0..5), advantage: rng.random_range(-3.0..3.0) })
            .collect();
        let kl: Vec<KlItem<'_, f64>> = obs[2..]
            .iter()
            .map(|o| KlItem { obs: o, teacher: teacher_distribution(Action::ALL[rng.random_range(0..5)], 0.05) })
            .collect();
        let lambda = rng.random_range(0.0..2.0);
        let analytic = actor_loss(&net, &pg, &kl, lambda).unwrap().grad;
        let numeric = central_diff(&net.params, |p| actor_loss(&with_params(&net, p), &pg, &kl, lambda).unwrap().loss);
        let e = rel_err(&analytic, &numeric);
        assert!(e <= 1e-4, "relative error {e}");
    }
}

#[test]
fn critic_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let net = random_net(&mut rng, 1);
        let obs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, net.arch.input)).collect();
        let batch: Vec<(&[f64], f64)> = obs.iter().map(|o| (o.as_slice(), rng.random_range(-5.0..5.0))).collect();
        let analytic = critic_loss(&net, &batch).unwrap().grad;
        let numeric = central_diff(&net.params, |p| critic_loss(&with_params(&net, p), &batch).unwrap().loss);
        let e = rel_err(&analytic, &numeric);
        assert!(e <= 1e-4, "relative error {e}");
    }
}

#[test]
fn constant_loss_has_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let net = random_net(&mut rng, 5);
    let o = random_vec(&mut rng, net.arch.input);
    let g = actor_loss(&net, &[PgItem { obs: &o, action: 2, advantage: 0.0 }], &[], 0.0).unwrap();
    assert!(g.grad.iter().all(|x| *x == 0.0));
}

#[test]
fn critic_mse_matches_independent_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let net = random_net(&mut rng, 1);
    let obs: Vec<Vec<f64>> = (0..6).map(|_| random_vec(&mut rng, net.arch.input)).collect();
    let rets: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
    let batch: Vec<(&[f64], f64)> = obs.iter().map(|o| o.as_slice()).zip(rets.iter().copied()).collect();
    let mut sq = 0.0;
    for (o, r) in obs.iter().zip(&rets) {
        let v = net.forward(o).unwrap()[0];
        sq += (v - r).powi(2);
    }
    assert!((critic_loss(&net, &batch).unwrap().loss - sq / 6.0).abs() < 1e-12);
}

#[test]
fn lambda_zero_is_plain_policy_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let net = random_net(&mut rng, 5);
    let o = random_vec(&mut rng, net.arch.input);
    let pg = [PgItem { obs: &o, action: 1, advantage: 0.7 }];
    let kl = [KlItem { obs: &o, teacher: teacher_distribution(Action::SpeedUp, 0.05) }];
    assert_eq!(actor_loss(&net, &pg, &kl, 0.0).unwrap(), actor_loss(&net, &pg, &[], 0.0).unwrap());
}

#[test]
fn large_lambda_fits_teacher_on_frozen_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut net = Mlp::random(Architecture::new(4, &[16], 5), 0.01, &mut rng);
    let obs: Vec<Vec<f64>> = (0..8).map(|_| random_vec(&mut rng, 4)).collect();
    let targets: Vec<Action> = (0..8).map(|i| Action::ALL[i % 5]).collect();
    let mut opt = ldpd_marl::optim::RmsProp::new(Default::default(), net.num_params());
    for _ in 0..3000 {
        let pg: Vec<PgItem<'_, f64>> = obs.iter().map(|o| PgItem { obs: o, action: 0, advantage: 1.0 }).collect();
        let kl: Vec<KlItem<'_, f64>> =
            obs.iter().zip(&targets).map(|(o, a)| KlItem { obs: o, teacher: teacher_distribution(*a, 0.05) }).collect();
        let mut g = actor_loss(&net, &pg, &kl, 100.0).unwrap().grad;
        ldpd_marl::optim::clip_grad_norm(&mut g, 0.5);
        opt.step(&mut net.params, &g);
    }
    for (o, a) in obs.iter().zip(&targets) {
        let p = softmax(&net.forward(o).unwrap());
        assert_eq!(ldpd_marl::policy::argmax(&p), a.index());
    }
}

#[test]
fn single_precision_network_agrees_with_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let net = random_net(&mut rng, 5);
    let small: ldpd_marl::Mlp32 = net.cast();
    let o = random_vec(&mut rng, net.arch.input);
    let o32: Vec<f32> = o.iter().map(|x| *x as f32).collect();
    for (a, b) in net.forward(&o).unwrap().iter().zip(small.forward(&o32).unwrap()) {
        assert!((a - b as f64).abs() < 1e-4);
    }
}

proptest! {
    #[test]
    fn softmax_sums_to_one(logits in proptest::array::uniform5(-50.0f64..50.0)) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn kl_is_non_negative(a in 0usize..5, eps in 0.0f64..0.49, logits in proptest::array::uniform5(-10.0f64..10.0)) {
        let t = teacher_distribution(Action::ALL[a], eps);
        let s = softmax(&logits);
        prop_assert!(ldpd_marl::policy::kl_divergence(&t, &s) >= -1e-15);
        prop_assert_eq!(ldpd_marl::policy::kl_divergence(&t, &t), 0.0);
    }
}
