//! Dueling Q-networks: a shared ReLU trunk feeding either a combinatorial
//! head (one Q-output per admissible subset) or a branching head (one binary
//! branch per elevator, sharing a single value stream).
//!
//! Forward and backward passes are written out explicitly; gradients are
//! checked against central finite differences in the test suite.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("input dimension {got} does not match network input {expected}")]
    InputDim { got: usize, expected: usize },
    #[error("network topologies differ")]
    TopologyMismatch,
}

/// Head shape of a Q-network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadSpec {
    /// One Q-value per admissible elevator subset.
    Combinatorial { actions: usize },
    /// Per-elevator binary branches (respond / ignore) with a shared value
    /// stream; each branch runs through its own hidden block.
    Branching { branches: usize, branch_hidden: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// (out, in)
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        // Uniform fan-in scaling, same bound for weights and biases.
        let bound = 1.0 / (in_dim as f64).sqrt();
        let w = Array2::from_shape_fn((out_dim, in_dim), |_| {
            rng.random_range(-bound..bound)
        });
        let b = Array1::from_shape_fn(out_dim, |_| rng.random_range(-bound..bound));
        Self { w, b }
    }

    /// x: (B, in) -> (B, out)
    fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w.t()) + &self.b
    }

    fn zeros_like(&self) -> LayerGrad {
        LayerGrad {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// Per-layer gradients in the network's canonical layer order.
pub type Gradients = Vec<LayerGrad>;

#[derive(Debug, Clone, PartialEq)]
enum Head {
    Combinatorial {
        value: Linear,
        advantage: Linear,
    },
    Branching {
        value: Linear,
        blocks: Vec<(Linear, Linear)>,
    },
}

/// Q-values for one batch.
#[derive(Debug, Clone, PartialEq)]
pub enum QOut {
    /// (B, actions)
    Combinatorial(Array2<f64>),
    /// One (B, 2) matrix per branch.
    Branching(Vec<Array2<f64>>),
}

/// Gradient of a scalar loss with respect to the Q-values, matching [`QOut`].
#[derive(Debug, Clone)]
pub enum QGrad {
    Combinatorial(Array2<f64>),
    Branching(Vec<Array2<f64>>),
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    /// Input to each trunk layer (first entry is the batch itself).
    trunk_in: Vec<Array2<f64>>,
    /// Pre-activations of each trunk layer.
    trunk_z: Vec<Array2<f64>>,
    /// Trunk output (post-ReLU).
    h: Array2<f64>,
    /// Branching: per-branch hidden (pre-activation, post-activation).
    branch_hidden: Vec<(Array2<f64>, Array2<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    input_dim: usize,
    hidden: Vec<usize>,
    spec: HeadSpec,
    trunk: Vec<Linear>,
    head: Head,
}

impl QNetwork {
    /// Seeded construction; the draw order of parameters is fixed, so equal
    /// seeds give bit-identical networks.
    pub fn new(input_dim: usize, hidden: &[usize], spec: HeadSpec, rng: &mut ChaCha8Rng) -> Self {
        assert!(!hidden.is_empty(), "at least one trunk layer");
        let mut trunk = Vec::with_capacity(hidden.len());
        let mut dim = input_dim;
        for &h in hidden {
            trunk.push(Linear::init(dim, h, rng));
            dim = h;
        }
        let head = match spec {
            HeadSpec::Combinatorial { actions } => Head::Combinatorial {
                value: Linear::init(dim, 1, rng),
                advantage: Linear::init(dim, actions, rng),
            },
            HeadSpec::Branching {
                branches,
                branch_hidden,
            } => Head::Branching {
                value: Linear::init(dim, 1, rng),
                blocks: (0..branches)
                    .map(|_| {
                        (
                            Linear::init(dim, branch_hidden, rng),
                            Linear::init(branch_hidden, 2, rng),
                        )
                    })
                    .collect(),
            },
        };
        Self {
            input_dim,
            hidden: hidden.to_vec(),
            spec,
            trunk,
            head,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn head_spec(&self) -> HeadSpec {
        self.spec
    }

    /// All parameter layers in canonical order: trunk, value stream, then
    /// advantage stream / branch blocks.
    pub fn layers(&self) -> Vec<&Linear> {
        let mut out: Vec<&Linear> = self.trunk.iter().collect();
        match &self.head {
            Head::Combinatorial { value, advantage } => {
                out.push(value);
                out.push(advantage);
            }
            Head::Branching { value, blocks } => {
                out.push(value);
                for (hidden, outp) in blocks {
                    out.push(hidden);
                    out.push(outp);
                }
            }
        }
        out
    }

    pub fn layers_mut(&mut self) -> Vec<&mut Linear> {
        let mut out: Vec<&mut Linear> = self.trunk.iter_mut().collect();
        match &mut self.head {
            Head::Combinatorial { value, advantage } => {
                out.push(value);
                out.push(advantage);
            }
            Head::Branching { value, blocks } => {
                out.push(value);
                for (hidden, outp) in blocks {
                    out.push(hidden);
                    out.push(outp);
                }
            }
        }
        out
    }

    pub fn zero_grads(&self) -> Gradients {
        self.layers().iter().map(|l| l.zeros_like()).collect()
    }

    /// Copy all parameters from another network of identical topology.
    pub fn copy_from(&mut self, other: &QNetwork) -> Result<(), NetError> {
        if self.input_dim != other.input_dim
            || self.hidden != other.hidden
            || self.spec != other.spec
        {
            return Err(NetError::TopologyMismatch);
        }
        let src = other.layers();
        for (dst, src) in self.layers_mut().into_iter().zip(src) {
            dst.w.assign(&src.w);
            dst.b.assign(&src.b);
        }
        Ok(())
    }

    /// Batch forward pass with cached activations for backprop.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<(QOut, ForwardCache), NetError> {
        if x.ncols() != self.input_dim {
            return Err(NetError::InputDim {
                got: x.ncols(),
                expected: self.input_dim,
            });
        }
        let mut trunk_in = Vec::with_capacity(self.trunk.len());
        let mut trunk_z = Vec::with_capacity(self.trunk.len());
        let mut a = x.clone();
        for layer in &self.trunk {
            trunk_in.push(a.clone());
            let z = layer.forward(&a);
            a = z.mapv(|v| v.max(0.0));
            trunk_z.push(z);
        }
        let h = a;
        match &self.head {
            Head::Combinatorial { value, advantage } => {
                let v = value.forward(&h); // (B, 1)
                let adv = advantage.forward(&h); // (B, A)
                let adv_mean = adv
                    .mean_axis(Axis(1))
                    .expect("non-empty action dimension")
                    .insert_axis(Axis(1));
                let q = &v + &(&adv - &adv_mean);
                Ok((
                    QOut::Combinatorial(q),
                    ForwardCache {
                        trunk_in,
                        trunk_z,
                        h,
                        branch_hidden: Vec::new(),
                    },
                ))
            }
            Head::Branching { value, blocks } => {
                let v = value.forward(&h); // (B, 1)
                let mut qs = Vec::with_capacity(blocks.len());
                let mut branch_hidden = Vec::with_capacity(blocks.len());
                for (hidden, outp) in blocks {
                    let z = hidden.forward(&h);
                    let act = z.mapv(|v| v.max(0.0));
                    let adv = outp.forward(&act); // (B, 2)
                    let adv_mean = adv
                        .mean_axis(Axis(1))
                        .expect("two outputs per branch")
                        .insert_axis(Axis(1));
                    qs.push(&v + &(&adv - &adv_mean));
                    branch_hidden.push((z, act));
                }
                Ok((
                    QOut::Branching(qs),
                    ForwardCache {
                        trunk_in,
                        trunk_z,
                        h,
                        branch_hidden,
                    },
                ))
            }
        }
    }

    /// Single-state forward pass.
    pub fn forward(&self, state: &[f64]) -> Result<QOut, NetError> {
        let x = Array2::from_shape_vec((1, state.len()), state.to_vec())
            .expect("row vector shape");
        Ok(self.forward_batch(&x)?.0)
    }

    /// Backpropagate `dq` (gradient of the loss w.r.t. the Q-values) through
    /// the network, returning per-layer parameter gradients in canonical
    /// layer order.
    pub fn backward(&self, cache: &ForwardCache, dq: &QGrad) -> Gradients {
        let mut grads = self.zero_grads();
        let n_trunk = self.trunk.len();
        // Gradient flowing into the trunk output.
        let mut dh: Array2<f64>;
        match (&self.head, dq) {
            (Head::Combinatorial { value, advantage }, QGrad::Combinatorial(dq)) => {
                // Q = V + A - mean(A): dV = sum_a dQ_a; dA = dQ - mean_a(dQ).
                let dv = dq.sum_axis(Axis(1)).insert_axis(Axis(1)); // (B,1)
                let dq_mean = dq
                    .mean_axis(Axis(1))
                    .expect("non-empty")
                    .insert_axis(Axis(1));
                let dadv = dq - &dq_mean;
                grads[n_trunk].w = dv.t().dot(&cache.h);
                grads[n_trunk].b = dv.sum_axis(Axis(0));
                grads[n_trunk + 1].w = dadv.t().dot(&cache.h);
                grads[n_trunk + 1].b = dadv.sum_axis(Axis(0));
                dh = dv.dot(&value.w) + dadv.dot(&advantage.w);
            }
            (Head::Branching { value, blocks }, QGrad::Branching(dqs)) => {
                // Shared value stream collects gradient from every branch.
                let mut dv: Array2<f64> = Array2::zeros((cache.h.nrows(), 1));
                for dq in dqs {
                    dv += &dq.sum_axis(Axis(1)).insert_axis(Axis(1));
                }
                grads[n_trunk].w = dv.t().dot(&cache.h);
                grads[n_trunk].b = dv.sum_axis(Axis(0));
                dh = dv.dot(&value.w);
                for (i, ((hidden, outp), dq)) in blocks.iter().zip(dqs).enumerate() {
                    let (z, act) = &cache.branch_hidden[i];
                    let dq_mean = dq
                        .mean_axis(Axis(1))
                        .expect("two outputs")
                        .insert_axis(Axis(1));
                    let dadv = dq - &dq_mean;
                    let g_out = n_trunk + 1 + 2 * i + 1;
                    let g_hidden = n_trunk + 1 + 2 * i;
                    grads[g_out].w = dadv.t().dot(act);
                    grads[g_out].b = dadv.sum_axis(Axis(0));
                    let dact = dadv.dot(&outp.w);
                    let dz = &dact * &z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                    grads[g_hidden].w = dz.t().dot(&cache.h);
                    grads[g_hidden].b = dz.sum_axis(Axis(0));
                    dh += &dz.dot(&hidden.w);
                }
            }
            _ => panic!("gradient shape does not match the head"),
        }
        // Trunk: ReLU then linear, walked backwards.
        let mut da = dh;
        for k in (0..n_trunk).rev() {
            let dz = &da * &cache.trunk_z[k].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            grads[k].w = dz.t().dot(&cache.trunk_in[k]);
            grads[k].b = dz.sum_axis(Axis(0));
            da = dz.dot(&self.trunk[k].w);
        }
        grads
    }
}

/// Greedy action index per row, ties to the lowest index.
pub fn argmax_rows(q: &Array2<f64>) -> Vec<usize> {
    q.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_v = row[0];
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > best_v {
                    best = i;
                    best_v = v;
                }
            }
            best
        })
        .collect()
}
