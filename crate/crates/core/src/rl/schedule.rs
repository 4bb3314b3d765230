//! Exploration schedule: exponential epsilon decay hitting the floor at a
//! fixed fraction of training.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub total_steps: u64,
    /// Fraction of training at which the floor is reached.
    pub floor_fraction: f64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, end: f64, total_steps: u64, floor_fraction: f64) -> Self {
        assert!(start >= end && end > 0.0 && floor_fraction > 0.0);
        Self {
            start,
            end,
            total_steps,
            floor_fraction,
        }
    }

    pub fn value(&self, step: u64) -> f64 {
        if self.total_steps == 0 || self.start == self.end {
            return self.end;
        }
        let horizon = self.floor_fraction * self.total_steps as f64;
        let lambda = (self.start / self.end).ln() / horizon;
        (self.start * (-lambda * step as f64).exp()).max(self.end)
    }
}
