//! Hall calls: one per arriving passenger group.

use std::collections::BTreeSet;

use super::passenger::PassengerId;
use super::sweep::Direction;

pub type CallId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallStatus {
    /// Registered, waiting for the agent's decision.
    PendingDecision,
    /// Dispatched; at least one cart is expected.
    Assigned,
    /// No cart is coming (zero-elevator action or every assigned cart came
    /// and went full); re-prompts the agent at the stored deadline.
    AwaitingReprompt,
    /// Every group member has boarded.
    Resolved,
}

#[derive(Debug, Clone)]
pub struct HallCall {
    pub id: CallId,
    pub floor: usize,
    pub direction: Direction,
    pub registered_time_s: f64,
    /// Group members, in arrival order. Members are removed from the waiting
    /// pool as they board but stay listed here.
    pub group: Vec<PassengerId>,
    pub assigned_elevators: BTreeSet<usize>,
    pub reprompt_deadline_s: Option<f64>,
    pub status: CallStatus,
    /// Members not yet boarded, front first.
    pub remaining: Vec<PassengerId>,
}

impl HallCall {
    pub fn is_active(&self) -> bool {
        self.status != CallStatus::Resolved
    }
}
