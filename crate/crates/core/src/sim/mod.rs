//! Discrete-event simulation engine.

pub mod call;
pub mod elevator;
pub mod events;
pub mod kinematics;
pub mod ledger;
pub mod passenger;
pub mod sweep;
mod world;

pub use call::{CallId, CallStatus, HallCall};
pub use elevator::{Elevator, ElevatorId, Phase};
pub use events::{EventLog, EventRecord};
pub use ledger::{RewardComponent, RewardLedger};
pub use passenger::{JourneyState, Passenger, PassengerId};
pub use sweep::{Direction, DestinationQueue, StopFlags};
pub use world::{
    steps_ceil, DecisionPoint, InfraStepOutcome, SimError, StepRewards, World, WorldOptions,
    REPROMPT_DELAY_S,
};
