//! Categorical policies over the five high-level actions.

use ldpd_core::sim::Action;
use ldpd_core::Scalar;

pub const N_ACTIONS: usize = Action::COUNT;

/// Student probabilities are floored here inside logarithms.
pub const PROB_FLOOR: f64 = 1e-8;

pub type Distribution<S> = [S; N_ACTIONS];

pub fn softmax<S: Scalar>(logits: &[S]) -> Distribution<S> {
    debug_assert_eq!(logits.len(), N_ACTIONS);
    let m = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let mut p = [S::zero(); N_ACTIONS];
    let mut sum = S::zero();
    for (pi, z) in p.iter_mut().zip(logits) {
        *pi = (*z - m).exp();
        sum = sum + *pi;
    }
    p.iter_mut().for_each(|pi| *pi = *pi / sum);
    p
}

pub fn argmax<S: Scalar>(p: &[S]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

/// Smoothed one-hot: `1 − ε` on the teacher action, `ε/4` elsewhere.
pub fn teacher_distribution<S: Scalar>(action: Action, eps: S) -> Distribution<S> {
    let off = eps / S::lit((N_ACTIONS - 1) as f64);
    let mut p = [off; N_ACTIONS];
    p[action.index()] = S::one() - eps;
    p
}

/// `Σ p_T · ln(p_T / p_S)` with the student side floored at [`PROB_FLOOR`].
pub fn kl_divergence<S: Scalar>(teacher: &[S], student: &[S]) -> S {
    let floor = S::lit(PROB_FLOOR);
    teacher
        .iter()
        .zip(student)
        .filter(|(t, _)| **t > S::zero())
        .map(|(t, s)| *t * (t.ln() - s.max(floor).ln()))
        .fold(S::zero(), |a, b| a + b)
}
