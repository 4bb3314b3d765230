//! Run configuration: building, traffic, agent, discounting and training
//! knobs, loadable from a TOML document with CLI overrides on top.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::BuildingConfig;
use crate::features::{DiscountScheme, DiscountSpec};

#[derive(Debug, Error)]
pub enum RunConfigError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Which decision-maker drives the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Etd,
    Random,
    First,
    Closest,
    Sector,
    LeastBusy,
    RlCombinatorial,
    RlBranching,
}

impl AgentKind {
    pub const ALL: [AgentKind; 8] = [
        AgentKind::Etd,
        AgentKind::Random,
        AgentKind::First,
        AgentKind::Closest,
        AgentKind::Sector,
        AgentKind::LeastBusy,
        AgentKind::RlCombinatorial,
        AgentKind::RlBranching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Etd => "etd",
            AgentKind::Random => "random",
            AgentKind::First => "first",
            AgentKind::Closest => "closest",
            AgentKind::Sector => "sector",
            AgentKind::LeastBusy => "least_busy",
            AgentKind::RlCombinatorial => "rl_combinatorial",
            AgentKind::RlBranching => "rl_branching",
        }
    }

    pub fn is_rl(self) -> bool {
        matches!(self, AgentKind::RlCombinatorial | AgentKind::RlBranching)
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown agent '{s}'"))
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficSection {
    /// Path to a TOML traffic profile; the built-in office profile when
    /// absent.
    pub profile_path: Option<PathBuf>,
    /// Day of week the traces describe (1 = Monday .. 7 = Sunday).
    pub day: u8,
    /// Group-size scale factor for busier-scenario sweeps.
    pub scale: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            profile_path: None,
            day: 2,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub master_seed: u64,
    /// Trace seeds; derived from the master seed when omitted.
    pub train_seed: Option<u64>,
    pub val_seed: Option<u64>,
    pub test_seed: Option<u64>,
    pub val_episodes: usize,
    pub test_episodes: usize,
    /// Safety cap per episode, in simulated hours.
    pub max_sim_hours: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            master_seed: 7,
            train_seed: None,
            val_seed: None,
            test_seed: None,
            val_episodes: 30,
            test_episodes: 20,
            max_sim_hours: 48.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentSection {
    pub kind: AgentKind,
    /// Largest subset a dispatch may send (1-3).
    pub max_subset: usize,
    /// Trained checkpoint, for evaluating RL agents.
    pub checkpoint: Option<PathBuf>,
    /// Normalization statistics; defaults to `norm_stats.json` next to the
    /// checkpoint.
    pub norm_stats: Option<PathBuf>,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            kind: AgentKind::Etd,
            max_subset: 1,
            checkpoint: None,
            norm_stats: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingSection {
    pub steps: u64,
    pub eval_interval: u64,
    pub learn_interval: u64,
    pub target_sync_interval: u64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub buffer_min: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_floor_fraction: f64,
    /// Decision states collected under the random dispatcher to fit the
    /// normalization statistics and measure the average decision gap.
    pub norm_states: usize,
    pub hidden: Vec<usize>,
    pub branch_hidden: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            steps: 200_000,
            eval_interval: 10_000,
            learn_interval: 10,
            target_sync_interval: 300,
            batch_size: 32,
            buffer_capacity: 10_000,
            buffer_min: 10_000,
            learning_rate: 5e-4,
            weight_decay: 1e-2,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            epsilon_floor_fraction: 0.8,
            norm_states: 100_000,
            hidden: vec![128, 512, 256],
            branch_hidden: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscountSection {
    pub scheme: DiscountScheme,
    pub gamma_step: f64,
}

impl Default for DiscountSection {
    fn default() -> Self {
        Self {
            scheme: DiscountScheme::Fixed,
            gamma_step: 0.95,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub building: BuildingConfig,
    pub traffic: TrafficSection,
    pub run: RunSection,
    pub agent: AgentSection,
    pub discount: DiscountSection,
    pub training: TrainingSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, RunConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| RunConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunConfigError> {
        self.building
            .validate()
            .map_err(|e| RunConfigError::Invalid(e.to_string()))?;
        if !(1..=3).contains(&self.agent.max_subset) {
            return Err(RunConfigError::Invalid(
                "agent.max_subset must be 1, 2 or 3".into(),
            ));
        }
        if !(self.traffic.scale > 0.0) {
            return Err(RunConfigError::Invalid(
                "traffic.scale must be positive".into(),
            ));
        }
        if !(1..=7).contains(&self.traffic.day) {
            return Err(RunConfigError::Invalid("traffic.day must be 1-7".into()));
        }
        if !(self.discount.gamma_step > 0.0 && self.discount.gamma_step < 1.0) {
            return Err(RunConfigError::Invalid(
                "discount.gamma_step must be in (0, 1)".into(),
            ));
        }
        if self.agent.kind.is_rl() {
            if self.training.steps == 0 {
                return Err(RunConfigError::Invalid(
                    "training.steps must be positive for RL agents".into(),
                ));
            }
            if self.training.eval_interval == 0
                || self.training.eval_interval > self.training.steps
            {
                return Err(RunConfigError::Invalid(
                    "training.eval_interval must be in 1..=training.steps".into(),
                ));
            }
            if self.training.learn_interval == 0 || self.training.target_sync_interval == 0 {
                return Err(RunConfigError::Invalid(
                    "learn and target-sync intervals must be positive".into(),
                ));
            }
            if self.training.batch_size == 0
                || self.training.batch_size > self.training.buffer_capacity
            {
                return Err(RunConfigError::Invalid(
                    "batch_size must fit in the replay buffer".into(),
                ));
            }
            if self.training.buffer_min > self.training.buffer_capacity {
                return Err(RunConfigError::Invalid(
                    "buffer_min cannot exceed buffer_capacity".into(),
                ));
            }
            if self.training.hidden.is_empty() {
                return Err(RunConfigError::Invalid(
                    "training.hidden needs at least one layer".into(),
                ));
            }
        }
        let (train, val, test) = (self.train_seed(), self.val_seed(), self.test_seed());
        if train == val || val == test || train == test {
            return Err(RunConfigError::Invalid(
                "train/val/test seeds must be pairwise distinct".into(),
            ));
        }
        if !(self.run.max_sim_hours > 0.0) {
            return Err(RunConfigError::Invalid(
                "run.max_sim_hours must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn train_seed(&self) -> u64 {
        self.run
            .train_seed
            .unwrap_or_else(|| derive_seed(self.run.master_seed, "train-env"))
    }

    pub fn val_seed(&self) -> u64 {
        self.run
            .val_seed
            .unwrap_or_else(|| derive_seed(self.run.master_seed, "val-env"))
    }

    pub fn test_seed(&self) -> u64 {
        self.run
            .test_seed
            .unwrap_or_else(|| derive_seed(self.run.master_seed, "test-env"))
    }

    /// Per-episode cap in infra-steps.
    pub fn max_episode_steps(&self) -> u64 {
        (self.run.max_sim_hours * 3600.0 / crate::config::INFRA_STEP_S) as u64
    }
}

/// Deterministic sub-seed derivation: distinct tags give independent seeds.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}
