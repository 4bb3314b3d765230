//! Passengers and their journey state.

use serde::{Deserialize, Serialize};

pub type PassengerId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JourneyState {
    /// Standing at the origin landing.
    Waiting,
    /// Claimed by a dwelling cart's boarding manifest, still on the landing.
    Reserved,
    /// Inside a cart.
    Riding,
    /// Delivered to the destination landing.
    Done,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Passenger {
    pub id: PassengerId,
    pub arrival_time_s: f64,
    pub origin: usize,
    pub destination: usize,
    pub weight_kg: f64,
    pub boarded_time_s: Option<f64>,
    pub alighted_time_s: Option<f64>,
    pub state: JourneyState,
    /// Hall call this passenger arrived under.
    pub call: usize,
}

impl Passenger {
    /// Landing-to-board wait, once boarded.
    pub fn floor_wait_s(&self) -> Option<f64> {
        self.boarded_time_s.map(|b| b - self.arrival_time_s)
    }

    /// Full arrival-to-alight journey time, once delivered.
    pub fn journey_s(&self) -> Option<f64> {
        self.alighted_time_s.map(|a| a - self.arrival_time_s)
    }

    pub fn in_system(&self) -> bool {
        self.state != JourneyState::Done
    }

    pub fn on_landing(&self) -> bool {
        matches!(self.state, JourneyState::Waiting | JourneyState::Reserved)
    }
}
