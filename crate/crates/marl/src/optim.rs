//! RMSProp and global-norm clipping.

use ldpd_core::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self { lr: 5e-4, decay: 0.99, eps: 1e-5 }
    }
}

/// `s ← ρs + (1−ρ)g²; θ ← θ − lr·g/(√s + ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp<S> {
    pub config: RmsPropConfig,
    pub square_avg: Vec<S>,
}

impl<S: Scalar> RmsProp<S> {
    pub fn new(config: RmsPropConfig, n: usize) -> Self {
        Self { config, square_avg: vec![S::zero(); n] }
    }

    pub fn step(&mut self, params: &mut [S], grad: &[S]) {
        let rho = S::lit(self.config.decay);
        let lr = S::lit(self.config.lr);
        let eps = S::lit(self.config.eps);
        for ((p, g), s) in params.iter_mut().zip(grad).zip(self.square_avg.iter_mut()) {
            *s = rho * *s + (S::one() - rho) * *g * *g;
            *p = *p - lr * *g / (s.sqrt() + eps);
        }
    }
}

/// Rescales `grad` so its L2 norm is at most `max_norm`; returns the norm
/// before clipping.
pub fn clip_grad_norm<S: Scalar>(grad: &mut [S], max_norm: S) -> S {
    let norm = grad.iter().fold(S::zero(), |a, g| a + *g * *g).sqrt();
    if norm > max_norm {
        let k = max_norm / norm;
        grad.iter_mut().for_each(|g| *g = *g * k);
    }
    norm
}
