//! Reward bookkeeping, decomposed by signal.

use serde::{Deserialize, Serialize};

/// The seven reward signals emitted by the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardComponent {
    /// Per infra-step penalty per passenger waiting at a landing.
    WaitFloor,
    /// Per infra-step penalty per passenger riding a cart.
    WaitElev,
    /// Reward when a passenger boards a cart.
    Loading,
    /// Reward when a passenger reaches their destination.
    Arrival,
    /// Per infra-step penalty per moving cart (energy proxy).
    Moving,
    /// Penalty when a full cart services a hall call and boards nobody.
    ElevatorFull,
    /// Penalty when a dispatch decision sends zero carts.
    ZeroElevators,
}

impl RewardComponent {
    pub const ALL: [RewardComponent; 7] = [
        RewardComponent::WaitFloor,
        RewardComponent::WaitElev,
        RewardComponent::Loading,
        RewardComponent::Arrival,
        RewardComponent::Moving,
        RewardComponent::ElevatorFull,
        RewardComponent::ZeroElevators,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardComponent::WaitFloor => "wait_floor",
            RewardComponent::WaitElev => "wait_elev",
            RewardComponent::Loading => "loading",
            RewardComponent::Arrival => "arrival",
            RewardComponent::Moving => "moving",
            RewardComponent::ElevatorFull => "elevator_full",
            RewardComponent::ZeroElevators => "zero_elevators",
        }
    }
}

/// Reward magnitudes per signal. `wait_floor`, `wait_elev` and `moving` are
/// per infra-step; the rest fire once per event.
pub const REWARD_WAIT: f64 = -0.01;
pub const REWARD_MOVING: f64 = -0.01;
pub const REWARD_LOADING: f64 = 2.0;
pub const REWARD_ARRIVAL: f64 = 2.0;
pub const REWARD_ELEVATOR_FULL: f64 = -10.0;
pub const REWARD_ZERO_ELEVATORS: f64 = -100.0;

/// Running per-component totals for one environment run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardLedger {
    pub wait_floor: f64,
    pub wait_elev: f64,
    pub loading: f64,
    pub arrival: f64,
    pub moving: f64,
    pub elevator_full: f64,
    pub zero_elevators: f64,
}

impl RewardLedger {
    pub fn add(&mut self, component: RewardComponent, value: f64) {
        *self.slot(component) += value;
    }

    pub fn get(&self, component: RewardComponent) -> f64 {
        match component {
            RewardComponent::WaitFloor => self.wait_floor,
            RewardComponent::WaitElev => self.wait_elev,
            RewardComponent::Loading => self.loading,
            RewardComponent::Arrival => self.arrival,
            RewardComponent::Moving => self.moving,
            RewardComponent::ElevatorFull => self.elevator_full,
            RewardComponent::ZeroElevators => self.zero_elevators,
        }
    }

    fn slot(&mut self, component: RewardComponent) -> &mut f64 {
        match component {
            RewardComponent::WaitFloor => &mut self.wait_floor,
            RewardComponent::WaitElev => &mut self.wait_elev,
            RewardComponent::Loading => &mut self.loading,
            RewardComponent::Arrival => &mut self.arrival,
            RewardComponent::Moving => &mut self.moving,
            RewardComponent::ElevatorFull => &mut self.elevator_full,
            RewardComponent::ZeroElevators => &mut self.zero_elevators,
        }
    }

    /// Sum of all seven components.
    pub fn total(&self) -> f64 {
        RewardComponent::ALL.iter().map(|&c| self.get(c)).sum()
    }
}
