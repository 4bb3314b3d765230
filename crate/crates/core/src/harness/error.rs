//! Errors surfaced by the orchestration layer.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    RunConfig(#[from] super::config::RunConfigError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Traffic(#[from] crate::traffic::TrafficError),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Net(#[from] crate::rl::NetError),
    #[error(transparent)]
    Checkpoint(#[from] crate::rl::CheckpointError),
    #[error("training diverged at step {step}: loss {loss}")]
    Diverged { step: u64, loss: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
