//! Experience replay: a fixed-capacity ring with uniform batch sampling.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Action as stored in the buffer: a codec index for the combinatorial head
/// or a per-elevator bitmask for the branching head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionRepr {
    Index(u16),
    Mask(u16),
}

/// One decision-to-decision experience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Normalized state at the decision.
    pub state: Vec<f64>,
    pub action: ActionRepr,
    /// Plain within-gap reward sum (fixed scheme).
    pub reward_fixed: f64,
    /// gamma_infra-discounted within-gap sum (variable scheme).
    pub reward_variable: f64,
    /// Infra-steps between this decision and the next.
    pub n_infra: u32,
    /// Normalized next decision state; zeros on terminal transitions.
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Ring buffer of the most recent `capacity` transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    capacity: usize,
    write: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            items: Vec::with_capacity(capacity),
            capacity,
            write: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.write] = t;
        }
        self.write = (self.write + 1) % self.capacity;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Uniform sample of `n` distinct transitions.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<&Transition> {
        assert!(n <= self.items.len(), "sample larger than buffer");
        rand::seq::index::sample(rng, self.items.len(), n)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }
}
