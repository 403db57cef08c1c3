//! One student: actor, centralised critic, and their optimisers.

use crate::mlp::{Architecture, Mlp};
use crate::optim::{clip_grad_norm, RmsProp, RmsPropConfig};
use crate::policy::{argmax, softmax, Distribution, N_ACTIONS};
use crate::MarlError;
use ldpd_core::sim::Action;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentAgent {
    pub actor: Mlp<f64>,
    pub critic: Mlp<f64>,
    pub actor_opt: RmsProp<f64>,
    pub critic_opt: RmsProp<f64>,
}

impl StudentAgent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        critic_dim: usize,
        hidden: &[usize],
        opt: RmsPropConfig,
        rng: &mut R,
    ) -> Self {
        let actor = Mlp::random(Architecture::new(obs_dim, hidden, N_ACTIONS), 0.01, rng);
        let critic = Mlp::random(Architecture::new(critic_dim, hidden, 1), 1.0, rng);
        let actor_opt = RmsProp::new(opt, actor.num_params());
        let critic_opt = RmsProp::new(opt, critic.num_params());
        Self { actor, critic, actor_opt, critic_opt }
    }

    pub fn policy(&self, obs: &[f64]) -> Result<Distribution<f64>, MarlError> {
        Ok(softmax(&self.actor.forward(obs)?))
    }

    pub fn value(&self, critic_in: &[f64]) -> Result<f64, MarlError> {
        Ok(self.critic.forward(critic_in)?[0])
    }

    pub fn greedy(&self, obs: &[f64]) -> Result<Action, MarlError> {
        Ok(Action::from_index(argmax(&self.policy(obs)?)).expect("five logits"))
    }

    /// Inverse-CDF draw from the policy using one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<Action, MarlError> {
        let p = self.policy(obs)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = N_ACTIONS - 1;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                pick = i;
                break;
            }
        }
        Ok(Action::from_index(pick).expect("five logits"))
    }

    pub fn apply_actor_grad(&mut self, mut grad: Vec<f64>, clip: f64) {
        clip_grad_norm(&mut grad, clip);
        self.actor_opt.step(&mut self.actor.params, &grad);
    }

    pub fn apply_critic_grad(&mut self, mut grad: Vec<f64>, clip: f64) {
        clip_grad_norm(&mut grad, clip);
        self.critic_opt.step(&mut self.critic.params, &grad);
    }
}
