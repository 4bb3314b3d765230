//! liftsim: a discrete-event elevator group control simulator with
//! rule-based dispatchers and deep Q-learning agents.
//!
//! The building advances in 0.1 s infra-steps; the agent is prompted once per
//! registered hall call and answers with a subset of carts. Rule-based
//! dispatchers (estimated-time-to-destination and five simpler ones) and two
//! dueling double deep Q-learning architectures (combinatorial and branching
//! action heads) share the same decision interface, so they can be trained,
//! evaluated and compared head to head from the CLI.

pub mod config;
pub mod dispatch;
pub mod features;
pub mod harness;
pub mod rl;
pub mod sim;
pub mod traffic;

pub use config::{BuildingConfig, ConfigError, INFRA_STEP_S};
pub use sim::{DecisionPoint, SimError, World, WorldOptions};
pub use traffic::{TrafficProfile, TrafficTrace};
