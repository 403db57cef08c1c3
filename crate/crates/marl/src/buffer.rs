//! Expert demonstrations collected while the teacher is consulted.

use ldpd_core::sim::Action;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// `(o, a*, r, o′)` for one agent and step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub done: bool,
    /// Centralised critic input at `o`.
    pub joint_obs: Vec<f64>,
}

/// Bounded FIFO store; the oldest entries are evicted first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ExpertBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn push(&mut self, t: Transition) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }
}

/// `λ(e) = λ0·max(0, 1 − e/E_te)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub lambda0: f64,
    pub teaching_episodes: usize,
}

impl AnnealSchedule {
    pub fn lambda(&self, episode: usize) -> f64 {
        if self.teaching_episodes == 0 {
            return 0.0;
        }
        self.lambda0 * (1.0 - episode as f64 / self.teaching_episodes as f64).max(0.0)
    }
}
