//! Agent-observable state vectors, normalization statistics, and reward
//! accumulation under the fixed and variable discounting schemes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dispatch::etd_cost;
use crate::sim::{CallId, World};

/// Seconds in a day, for the time-of-day fraction.
const DAY_S: f64 = 86_400.0;

/// Raw feature vector at a decision point.
///
/// Layout: `[call_floor, call_direction, time_of_day, day_of_week]` followed
/// by `[position_norm, etd_score, speed, load_kg]` per elevator in id order;
/// dimension `4 + 4 * num_elevators` (28 for the default six-cart building).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// State dimension for a building with `num_elevators` carts.
pub fn state_dim(num_elevators: usize) -> usize {
    4 + 4 * num_elevators
}

/// Build the state vector for the pending call.
pub fn featurize(world: &World, call: CallId) -> StateVector {
    let cfg = world.config();
    let call = world.call(call);
    let mut v = Vec::with_capacity(state_dim(cfg.num_elevators));
    v.push(call.floor as f64);
    v.push(call.direction.sign());
    v.push((world.clock_s() % DAY_S) / DAY_S);
    v.push(world.day_of_week() as f64);
    let height = cfg.building_height();
    for cart in world.elevators() {
        v.push(cart.position_m / height);
        v.push(etd_cost(world, cart.id, call));
        v.push(cart.velocity_mps);
        v.push(cart.load_kg);
    }
    StateVector(v)
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("need at least 2 states to fit normalization statistics (got {0})")]
    TooFewStates(usize),
    #[error("state dimension {got} does not match statistics dimension {expected}")]
    DimMismatch { got: usize, expected: usize },
    #[error("avg_n must be >= 1 (got {0})")]
    BadAvgN(f64),
    #[error("gamma_step must be in (0, 1) (got {0})")]
    BadGamma(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Floor applied to degenerate (constant-feature) standard deviations.
pub const SD_FLOOR: f64 = 1e-6;

/// Per-element mean and standard deviation, fitted once on training rollouts
/// and reused for validation and test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub dim: usize,
}

impl NormStats {
    pub fn fit(states: &[StateVector]) -> Result<Self, FeatureError> {
        if states.len() < 2 {
            return Err(FeatureError::TooFewStates(states.len()));
        }
        let dim = states[0].dim();
        let n = states.len() as f64;
        let mut means = vec![0.0; dim];
        for s in states {
            debug_assert_eq!(s.dim(), dim);
            for (m, &x) in means.iter_mut().zip(&s.0) {
                *m += x;
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        let mut sds = vec![0.0; dim];
        for s in states {
            for ((sd, &m), &x) in sds.iter_mut().zip(&means).zip(&s.0) {
                *sd += (x - m) * (x - m);
            }
        }
        for sd in sds.iter_mut() {
            *sd = (*sd / n).sqrt().max(SD_FLOOR);
        }
        Ok(Self { means, sds, dim })
    }

    pub fn normalize(&self, state: &StateVector) -> Result<StateVector, FeatureError> {
        if state.dim() != self.dim {
            return Err(FeatureError::DimMismatch {
                got: state.dim(),
                expected: self.dim,
            });
        }
        Ok(StateVector(
            state
                .0
                .iter()
                .zip(self.means.iter().zip(&self.sds))
                .map(|(&x, (&m, &sd))| (x - m) / sd)
                .collect(),
        ))
    }

    pub fn denormalize(&self, state: &StateVector) -> StateVector {
        StateVector(
            state
                .0
                .iter()
                .zip(self.means.iter().zip(&self.sds))
                .map(|(&z, (&m, &sd))| z * sd + m)
                .collect(),
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), FeatureError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Stable content hash, stored in checkpoints to bind them to the
    /// statistics they were trained under.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("stats serialize");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// How per-decision returns are discounted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscountScheme {
    /// One gamma per decision step regardless of elapsed infra-steps.
    Fixed,
    /// Per-infra-step gamma compounded over the gap.
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    pub scheme: DiscountScheme,
    pub gamma_step: f64,
    /// Per-infra-step factor; required by the variable scheme, derived via
    /// [`calibrate_gamma_infra`].
    pub gamma_infra: Option<f64>,
}

impl Default for DiscountSpec {
    fn default() -> Self {
        Self {
            scheme: DiscountScheme::Fixed,
            gamma_step: 0.95,
            gamma_infra: None,
        }
    }
}

/// Plain sum of the per-infra-step rewards in a decision gap.
pub fn accumulate_fixed(rewards: &[f64]) -> f64 {
    debug_assert!(!rewards.is_empty(), "decision gaps span at least one step");
    rewards.iter().sum()
}

/// Discounted within-gap sum and the bootstrap factor `gamma_infra^N`.
pub fn accumulate_variable(rewards: &[f64], gamma_infra: f64) -> (f64, f64) {
    debug_assert!(!rewards.is_empty(), "decision gaps span at least one step");
    let mut sum = 0.0;
    let mut factor = 1.0;
    for &r in rewards {
        sum += factor * r;
        factor *= gamma_infra;
    }
    (sum, factor)
}

/// Per-infra-step discount whose compound over an average gap equals the
/// per-step discount: `gamma_step^(1/avg_n)`.
pub fn calibrate_gamma_infra(gamma_step: f64, avg_n: f64) -> Result<f64, FeatureError> {
    if !(gamma_step > 0.0 && gamma_step < 1.0) {
        return Err(FeatureError::BadGamma(gamma_step));
    }
    if !(avg_n >= 1.0) {
        return Err(FeatureError::BadAvgN(avg_n));
    }
    Ok(gamma_step.powf(1.0 / avg_n))
}
