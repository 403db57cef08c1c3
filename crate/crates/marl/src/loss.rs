//! Actor and critic objectives with their parameter gradients.

use crate::mlp::Mlp;
use crate::policy::{kl_divergence, softmax, Distribution, N_ACTIONS, PROB_FLOOR};
use crate::MarlError;
use ldpd_core::Scalar;

/// `r + γ·V(s′)·(1 − done) − V(s)`.
pub fn advantage<S: Scalar>(r: S, v_s: S, v_next: S, gamma: S, done: bool) -> S {
    let boot = if done { S::zero() } else { gamma * v_next };
    r + boot - v_s
}

/// One policy-gradient sample; the advantage is a constant.
#[derive(Debug, Clone, Copy)]
pub struct PgItem<'a, S> {
    pub obs: &'a [S],
    pub action: usize,
    pub advantage: S,
}

/// One distillation sample: a state and the teacher's distribution there.
#[derive(Debug, Clone, Copy)]
pub struct KlItem<'a, S> {
    pub obs: &'a [S],
    pub teacher: Distribution<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad<S> {
    pub loss: S,
    pub grad: Vec<S>,
}

/// `mean_pg[−ln π(a|s)·A] + λ·mean_kl[KL(π_T ‖ π)]`. Passing the same states
/// in both batches gives the per-item form `mean[−ln π·A + λ·KL]`. With
/// `λ = 0` the distillation batch is not touched at all.
pub fn actor_loss<S: Scalar>(
    actor: &Mlp<S>,
    pg: &[PgItem<'_, S>],
    kl: &[KlItem<'_, S>],
    lambda: S,
) -> Result<LossGrad<S>, MarlError> {
    if pg.is_empty() && (kl.is_empty() || lambda == S::zero()) {
        return Err(MarlError::EmptyBatch);
    }
    if lambda < S::zero() || !lambda.is_finite() {
        return Err(MarlError::NonFinite("lambda"));
    }
    let mut grad = vec![S::zero(); actor.num_params()];
    let mut loss = S::zero();
    let floor = S::lit(PROB_FLOOR);

    if !pg.is_empty() {
        let w = S::one() / S::lit(pg.len() as f64);
        for item in pg {
            if !item.advantage.is_finite() {
                return Err(MarlError::NonFinite("advantage"));
            }
            let cache = actor.forward_cached(item.obs)?;
            let p = softmax(cache.output());
            loss = loss - w * item.advantage * p[item.action].max(floor).ln();
            // ∂(−ln p_a)/∂z = p − e_a; the floor is inactive for p_a ≥ 1e-8.
            let active = p[item.action] >= floor;
            let mut dz = [S::zero(); N_ACTIONS];
            if active {
                for (j, d) in dz.iter_mut().enumerate() {
                    let e = if j == item.action { S::one() } else { S::zero() };
                    *d = w * item.advantage * (p[j] - e);
                }
            }
            actor.backward_into(&cache, &dz, &mut grad)?;
        }
    }

    if lambda != S::zero() && !kl.is_empty() {
        let w = lambda / S::lit(kl.len() as f64);
        for item in kl {
            let cache = actor.forward_cached(item.obs)?;
            let p = softmax(cache.output());
            loss = loss + w * kl_divergence(&item.teacher, &p);
            // ∂/∂z_j of −Σ_k t_k ln p_k over unfloored k is p_j·Σt_k − t_j.
            let mass = item
                .teacher
                .iter()
                .zip(&p)
                .filter(|(_, pk)| **pk >= floor)
                .fold(S::zero(), |s, (t, _)| s + *t);
            let mut dz = [S::zero(); N_ACTIONS];
            for (j, d) in dz.iter_mut().enumerate() {
                let own = if p[j] >= floor { item.teacher[j] } else { S::zero() };
                *d = w * (p[j] * mass - own);
            }
            actor.backward_into(&cache, &dz, &mut grad)?;
        }
    }
    if !loss.is_finite() {
        return Err(MarlError::NonFinite("actor loss"));
    }
    Ok(LossGrad { loss, grad })
}

/// Mean squared error `mean[(V(s) − R)²]`.
pub fn critic_loss<S: Scalar>(critic: &Mlp<S>, batch: &[(&[S], S)]) -> Result<LossGrad<S>, MarlError> {
    if batch.is_empty() {
        return Err(MarlError::EmptyBatch);
    }
    let n = S::lit(batch.len() as f64);
    let mut grad = vec![S::zero(); critic.num_params()];
    let mut loss = S::zero();
    for (obs, ret) in batch {
        let cache = critic.forward_cached(obs)?;
        let r = cache.output()[0] - *ret;
        loss = loss + r * r / n;
        critic.backward_into(&cache, &[S::lit(2.0) * r / n], &mut grad)?;
    }
    if !loss.is_finite() {
        return Err(MarlError::NonFinite("critic loss"));
    }
    Ok(LossGrad { loss, grad })
}
