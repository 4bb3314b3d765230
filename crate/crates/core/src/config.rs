//! Building geometry and cart parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The simulation tick length in seconds. Everything in the engine is
/// quantized to this grid.
pub const INFRA_STEP_S: f64 = 0.1;

/// Static description of the building and its elevator hardware.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildingConfig {
    pub num_elevators: usize,
    /// Landings are indexed `0..num_landings`.
    pub num_landings: usize,
    /// Distance between adjacent landings, meters.
    pub floor_height: f64,
    /// Cart speed limit, m/s.
    pub max_speed: f64,
    /// Constant acceleration / deceleration, m/s^2.
    pub acceleration: f64,
    /// Payload limit per cart, kg.
    pub capacity_kg: f64,
    /// Door open + close time per stop, seconds.
    pub door_cycle_s: f64,
    /// Boarding or alighting time per passenger, seconds.
    pub board_time_s: f64,
    /// Simulation tick, seconds. Must equal [`INFRA_STEP_S`].
    pub infra_step_s: f64,
}

impl Default for BuildingConfig {
    fn default() -> Self {
        Self {
            num_elevators: 6,
            num_landings: 16,
            floor_height: 3.3,
            max_speed: 2.5,
            acceleration: 1.0,
            capacity_kg: 1000.0,
            door_cycle_s: 4.0,
            board_time_s: 1.0,
            infra_step_s: INFRA_STEP_S,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("num_landings must be >= 2 (got {0})")]
    TooFewLandings(usize),
    #[error("num_elevators must be >= 1 (got {0})")]
    NoElevators(usize),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("infra_step_s is fixed at 0.1 s")]
    BadInfraStep,
}

impl BuildingConfig {
    /// Total travel span from the lowest to the highest landing, meters.
    pub fn building_height(&self) -> f64 {
        (self.num_landings - 1) as f64 * self.floor_height
    }

    /// Position of a landing in meters above landing 0.
    pub fn landing_position(&self, landing: usize) -> f64 {
        landing as f64 * self.floor_height
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_landings < 2 {
            return Err(ConfigError::TooFewLandings(self.num_landings));
        }
        if self.num_elevators == 0 {
            return Err(ConfigError::NoElevators(self.num_elevators));
        }
        for (name, v) in [
            ("floor_height", self.floor_height),
            ("max_speed", self.max_speed),
            ("acceleration", self.acceleration),
            ("capacity_kg", self.capacity_kg),
            ("door_cycle_s", self.door_cycle_s),
            ("board_time_s", self.board_time_s),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::NonPositive(name));
            }
        }
        if self.infra_step_s != INFRA_STEP_S {
            return Err(ConfigError::BadInfraStep);
        }
        Ok(())
    }
}
