//! Versioned checkpoints: topology, parameters, optimizer state, RNG state,
//! step counters, and the hash of the normalization statistics the network
//! was trained under.

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::DiscountSpec;

use super::net::{Gradients, HeadSpec, LayerGrad, QNetwork};
use super::optim::{AdamW, AdamWConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("parameter block {index} has inconsistent shape")]
    BadShape { index: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorBlock {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub head: HeadSpec,
    pub num_elevators: usize,
    pub max_subset: usize,
    pub discount: DiscountSpec,
    pub adamw: AdamWConfig,
    pub params: Vec<TensorBlock>,
    pub opt_step: u64,
    pub opt_m: Vec<TensorBlock>,
    pub opt_v: Vec<TensorBlock>,
    pub rng: ChaCha8Rng,
    pub env_steps: u64,
    pub train_steps: u64,
    pub norm_stats_hash: String,
}

fn blocks_from_layers(layers: &[&super::net::Linear]) -> Vec<TensorBlock> {
    layers
        .iter()
        .map(|l| TensorBlock {
            rows: l.w.nrows(),
            cols: l.w.ncols(),
            w: l.w.iter().copied().collect(),
            b: l.b.iter().copied().collect(),
        })
        .collect()
}

fn blocks_from_grads(grads: &Gradients) -> Vec<TensorBlock> {
    grads
        .iter()
        .map(|g| TensorBlock {
            rows: g.w.nrows(),
            cols: g.w.ncols(),
            w: g.w.iter().copied().collect(),
            b: g.b.iter().copied().collect(),
        })
        .collect()
}

fn grads_from_blocks(blocks: &[TensorBlock]) -> Result<Gradients, CheckpointError> {
    blocks
        .iter()
        .enumerate()
        .map(|(index, blk)| {
            let w = Array2::from_shape_vec((blk.rows, blk.cols), blk.w.clone())
                .map_err(|_| CheckpointError::BadShape { index })?;
            if blk.b.len() != blk.rows {
                return Err(CheckpointError::BadShape { index });
            }
            Ok(LayerGrad {
                w,
                b: Array1::from_vec(blk.b.clone()),
            })
        })
        .collect()
}

impl Checkpoint {
    #[allow(clippy::too_many_arguments)]
    pub fn capture(
        net: &QNetwork,
        opt: &AdamW,
        rng: &ChaCha8Rng,
        env_steps: u64,
        train_steps: u64,
        num_elevators: usize,
        max_subset: usize,
        discount: DiscountSpec,
        norm_stats_hash: String,
    ) -> Self {
        let (m, v) = opt.moments();
        Self {
            version: CHECKPOINT_VERSION,
            input_dim: net.input_dim(),
            hidden: net.hidden().to_vec(),
            head: net.head_spec(),
            num_elevators,
            max_subset,
            discount,
            adamw: opt.cfg,
            params: blocks_from_layers(&net.layers()),
            opt_step: opt.step,
            opt_m: blocks_from_grads(m),
            opt_v: blocks_from_grads(v),
            rng: rng.clone(),
            env_steps,
            train_steps,
            norm_stats_hash,
        }
    }

    /// Rebuild the network with the stored parameters.
    pub fn restore_net(&self) -> Result<QNetwork, CheckpointError> {
        if self.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(self.version));
        }
        let mut seed_rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = QNetwork::new(self.input_dim, &self.hidden, self.head, &mut seed_rng);
        let blocks = &self.params;
        let mut layers = net.layers_mut();
        if layers.len() != blocks.len() {
            return Err(CheckpointError::BadShape { index: 0 });
        }
        for (index, (layer, blk)) in layers.iter_mut().zip(blocks).enumerate() {
            if layer.w.nrows() != blk.rows
                || layer.w.ncols() != blk.cols
                || blk.b.len() != blk.rows
            {
                return Err(CheckpointError::BadShape { index });
            }
            let w = Array2::from_shape_vec((blk.rows, blk.cols), blk.w.clone())
                .map_err(|_| CheckpointError::BadShape { index })?;
            layer.w.assign(&w);
            layer.b.assign(&Array1::from_vec(blk.b.clone()));
        }
        drop(layers);
        Ok(net)
    }

    /// Rebuild the optimizer with its moment estimates.
    pub fn restore_optimizer(&self, net: &QNetwork) -> Result<AdamW, CheckpointError> {
        let mut opt = AdamW::new(net, self.adamw);
        let m = grads_from_blocks(&self.opt_m)?;
        let v = grads_from_blocks(&self.opt_v)?;
        opt.restore_moments(self.opt_step, m, v);
        Ok(opt)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(ckpt.version));
        }
        Ok(ckpt)
    }
}
