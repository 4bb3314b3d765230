//! Per-cart state: motion, doors, payload.

use std::collections::VecDeque;

use super::call::CallId;
use super::kinematics::MotionProfile;
use super::passenger::PassengerId;
use super::sweep::{Direction, DestinationQueue};

pub type ElevatorId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Accelerating,
    Cruising,
    Decelerating,
    Doors,
}

/// A boarding/alighting event inside a dwell, at a step offset from the
/// start of the stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoorEvent {
    Alight(PassengerId),
    Board(PassengerId),
}

/// One door cycle at a landing, with its pre-committed manifest.
#[derive(Debug, Clone)]
pub struct DwellState {
    pub floor: usize,
    /// Total dwell length in infra-steps (door cycle + per-person time,
    /// rounded up to whole steps).
    pub total_steps: u64,
    pub elapsed_steps: u64,
    /// (step offset, event), in firing order.
    pub events: VecDeque<(u64, DoorEvent)>,
    /// Calls this stop is servicing; settled when the doors close.
    pub served_calls: Vec<CallId>,
}

#[derive(Debug, Clone)]
pub struct Elevator {
    pub id: ElevatorId,
    /// Meters above landing 0.
    pub position_m: f64,
    /// Signed velocity, m/s; negative is down.
    pub velocity_mps: f64,
    pub phase: Phase,
    pub committed: Option<Direction>,
    pub queue: DestinationQueue,
    pub onboard: Vec<PassengerId>,
    pub load_kg: f64,
    pub(crate) trajectory: Option<MotionProfile>,
    pub(crate) trajectory_steps: u64,
    pub(crate) dwell: Option<DwellState>,
}

impl Elevator {
    pub fn parked_at(id: ElevatorId, landing: usize, floor_height: f64) -> Self {
        Self {
            id,
            position_m: landing as f64 * floor_height,
            velocity_mps: 0.0,
            phase: Phase::Idle,
            committed: None,
            queue: DestinationQueue::default(),
            onboard: Vec::new(),
            load_kg: 0.0,
            trajectory: None,
            trajectory_steps: 0,
            dwell: None,
        }
    }

    pub fn is_moving(&self) -> bool {
        matches!(
            self.phase,
            Phase::Accelerating | Phase::Cruising | Phase::Decelerating
        )
    }

    /// Infra-steps left before the doors close, zero unless dwelling.
    pub fn dwell_remaining_steps(&self) -> u64 {
        self.dwell
            .as_ref()
            .map(|d| d.total_steps.saturating_sub(d.elapsed_steps))
            .unwrap_or(0)
    }

    /// Landing the doors are currently open at, if dwelling.
    pub fn dwelling_at(&self) -> Option<usize> {
        self.dwell.as_ref().map(|d| d.floor)
    }

    /// Phase label from the current point on the velocity profile.
    pub(crate) fn motion_phase(profile: &MotionProfile, tau: f64) -> Phase {
        let (_, v) = profile.eval(tau);
        let (_, v_next) = profile.eval(tau + 1e-9);
        if v_next.abs() > v.abs() + 1e-12 {
            Phase::Accelerating
        } else if v_next.abs() + 1e-12 < v.abs() {
            Phase::Decelerating
        } else {
            Phase::Cruising
        }
    }
}
