//! Acting and learning: epsilon-greedy selection, double-Q targets, Huber
//! loss, and the gradient step wiring them together.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dispatch::Policy;
use crate::features::{featurize, DiscountScheme, DiscountSpec, NormStats};
use crate::sim::{CallId, World};

use super::codec::ActionCodec;
use super::net::{argmax_rows, Gradients, NetError, QGrad, QNetwork, QOut};
use super::optim::AdamW;
use super::replay::{ActionRepr, ReplayBuffer, Transition};

/// Huber loss (delta = 1) and its derivative.
pub fn huber(e: f64) -> f64 {
    if e.abs() <= 1.0 {
        0.5 * e * e
    } else {
        e.abs() - 0.5
    }
}

pub fn huber_grad(e: f64) -> f64 {
    e.clamp(-1.0, 1.0)
}

/// Epsilon-greedy action for the combinatorial head.
pub fn select_combinatorial(
    net: &QNetwork,
    codec: &ActionCodec,
    state: &[f64],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, ActionRepr) {
    let index = if rng.random::<f64>() < epsilon {
        rng.random_range(0..codec.num_actions())
    } else {
        let q = match net.forward(state).expect("state matches network input") {
            QOut::Combinatorial(q) => q,
            _ => panic!("combinatorial selection on a branching network"),
        };
        argmax_rows(&q)[0]
    };
    let subset = codec.decode(index).expect("index in range").to_vec();
    (subset, ActionRepr::Index(index as u16))
}

/// Epsilon-greedy action for the branching head: one independent binary
/// decision per elevator. The zero subset is a legal outcome.
pub fn select_branching(
    net: &QNetwork,
    state: &[f64],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, ActionRepr) {
    let branches = match net.head_spec() {
        super::net::HeadSpec::Branching { branches, .. } => branches,
        _ => panic!("branching selection on a combinatorial network"),
    };
    let mut mask: u16 = 0;
    if rng.random::<f64>() < epsilon {
        for i in 0..branches {
            if rng.random_bool(0.5) {
                mask |= 1 << i;
            }
        }
    } else {
        let qs = match net.forward(state).expect("state matches network input") {
            QOut::Branching(qs) => qs,
            _ => unreachable!(),
        };
        for (i, q) in qs.iter().enumerate() {
            // Ties break towards index 0 (do not respond).
            if q[[0, 1]] > q[[0, 0]] {
                mask |= 1 << i;
            }
        }
    }
    (mask_to_subset(mask), ActionRepr::Mask(mask))
}

pub fn mask_to_subset(mask: u16) -> Vec<usize> {
    (0..16).filter(|i| mask & (1 << i) != 0).collect()
}

/// Greedy subset under either head; used at evaluation time.
pub fn greedy_subset(net: &QNetwork, codec: Option<&ActionCodec>, state: &[f64]) -> Vec<usize> {
    match net.forward(state).expect("state matches network input") {
        QOut::Combinatorial(q) => {
            let codec = codec.expect("combinatorial head needs its codec");
            codec.decode(argmax_rows(&q)[0]).expect("in range").to_vec()
        }
        QOut::Branching(qs) => {
            let mut subset = Vec::new();
            for (i, q) in qs.iter().enumerate() {
                if q[[0, 1]] > q[[0, 0]] {
                    subset.push(i);
                }
            }
            subset
        }
    }
}

/// Bootstrap targets, one per transition (combinatorial) or one per
/// transition and branch (branching).
#[derive(Debug, Clone, PartialEq)]
pub enum TargetValues {
    Combinatorial(Vec<f64>),
    /// (B, branches)
    Branching(Array2<f64>),
}

fn gap_reward(spec: &DiscountSpec, t: &Transition) -> f64 {
    match spec.scheme {
        DiscountScheme::Fixed => t.reward_fixed,
        DiscountScheme::Variable => t.reward_variable,
    }
}

fn gap_factor(spec: &DiscountSpec, t: &Transition) -> f64 {
    match spec.scheme {
        DiscountScheme::Fixed => spec.gamma_step,
        DiscountScheme::Variable => spec
            .gamma_infra
            .expect("variable scheme requires a calibrated gamma_infra")
            .powi(t.n_infra as i32),
    }
}

/// Double-Q targets: the bootstrap action comes from the online network, its
/// value from the target network; terminal transitions bootstrap nothing.
pub fn ddqn_targets(
    batch: &[&Transition],
    online: &QNetwork,
    target: &QNetwork,
    spec: &DiscountSpec,
) -> Result<TargetValues, NetError> {
    let dim = online.input_dim();
    let mut next = Array2::zeros((batch.len(), dim));
    for (i, t) in batch.iter().enumerate() {
        if t.next_state.len() != dim {
            return Err(NetError::InputDim {
                got: t.next_state.len(),
                expected: dim,
            });
        }
        for (j, &v) in t.next_state.iter().enumerate() {
            next[[i, j]] = v;
        }
    }
    let (q_online, _) = online.forward_batch(&next)?;
    let (q_target, _) = target.forward_batch(&next)?;
    match (q_online, q_target) {
        (QOut::Combinatorial(qo), QOut::Combinatorial(qt)) => {
            let picks = argmax_rows(&qo);
            let ys = batch
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let r = gap_reward(spec, t);
                    if t.terminal {
                        r
                    } else {
                        r + gap_factor(spec, t) * qt[[i, picks[i]]]
                    }
                })
                .collect();
            Ok(TargetValues::Combinatorial(ys))
        }
        (QOut::Branching(qo), QOut::Branching(qt)) => {
            let branches = qo.len();
            let mut ys = Array2::zeros((batch.len(), branches));
            for (j, (qoj, qtj)) in qo.iter().zip(&qt).enumerate() {
                let picks = argmax_rows(qoj);
                for (i, t) in batch.iter().enumerate() {
                    let r = gap_reward(spec, t);
                    ys[[i, j]] = if t.terminal {
                        r
                    } else {
                        r + gap_factor(spec, t) * qtj[[i, picks[i]]]
                    };
                }
            }
            Ok(TargetValues::Branching(ys))
        }
        _ => Err(NetError::TopologyMismatch),
    }
}

/// Huber loss of the taken actions' Q-values against the targets, plus the
/// parameter gradients. Branching averages across branches as well as the
/// batch.
pub fn loss_and_grads(
    net: &QNetwork,
    x: &Array2<f64>,
    actions: &[ActionRepr],
    targets: &TargetValues,
) -> Result<(f64, Gradients), NetError> {
    let (q, cache) = net.forward_batch(x)?;
    let b = x.nrows() as f64;
    match (q, targets) {
        (QOut::Combinatorial(q), TargetValues::Combinatorial(ys)) => {
            let mut loss = 0.0;
            let mut dq = Array2::zeros(q.raw_dim());
            for (i, (action, &y)) in actions.iter().zip(ys).enumerate() {
                let a = match action {
                    ActionRepr::Index(a) => *a as usize,
                    ActionRepr::Mask(_) => panic!("mask action on combinatorial head"),
                };
                let e = q[[i, a]] - y;
                loss += huber(e);
                dq[[i, a]] = huber_grad(e) / b;
            }
            Ok((loss / b, net.backward(&cache, &QGrad::Combinatorial(dq))))
        }
        (QOut::Branching(qs), TargetValues::Branching(ys)) => {
            let branches = qs.len();
            let mut loss = 0.0;
            let mut dqs: Vec<Array2<f64>> =
                qs.iter().map(|q| Array2::zeros(q.raw_dim())).collect();
            for (i, action) in actions.iter().enumerate() {
                let mask = match action {
                    ActionRepr::Mask(m) => *m,
                    ActionRepr::Index(_) => panic!("index action on branching head"),
                };
                for j in 0..branches {
                    let a = usize::from(mask & (1 << j) != 0);
                    let e = qs[j][[i, a]] - ys[[i, j]];
                    loss += huber(e);
                    dqs[j][[i, a]] = huber_grad(e) / (b * branches as f64);
                }
            }
            Ok((
                loss / (b * branches as f64),
                net.backward(&cache, &QGrad::Branching(dqs)),
            ))
        }
        _ => Err(NetError::TopologyMismatch),
    }
}

/// One learning update from a uniform replay batch. No-op while the buffer
/// is below its fill threshold.
#[allow(clippy::too_many_arguments)]
pub fn train_step(
    online: &mut QNetwork,
    target: &QNetwork,
    buffer: &ReplayBuffer,
    opt: &mut AdamW,
    lr: f64,
    batch_size: usize,
    min_fill: usize,
    spec: &DiscountSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Option<f64>, NetError> {
    if buffer.len() < min_fill || buffer.len() < batch_size {
        return Ok(None);
    }
    let batch = buffer.sample(batch_size, rng);
    let targets = ddqn_targets(&batch, online, target, spec)?;
    let dim = online.input_dim();
    let mut x = Array2::zeros((batch.len(), dim));
    for (i, t) in batch.iter().enumerate() {
        for (j, &v) in t.state.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    let actions: Vec<ActionRepr> = batch.iter().map(|t| t.action).collect();
    let (loss, grads) = loss_and_grads(online, &x, &actions, &targets)?;
    opt.update(online, &grads, lr);
    Ok(Some(loss))
}

/// Hard target update: copy every online parameter.
pub fn sync_target(online: &QNetwork, target: &mut QNetwork) -> Result<(), NetError> {
    target.copy_from(online)
}

/// Greedy evaluation policy over a trained network.
pub struct RlPolicy {
    pub net: QNetwork,
    pub norm: NormStats,
    pub codec: Option<ActionCodec>,
}

impl Policy for RlPolicy {
    fn decide(&mut self, world: &World, call: CallId) -> Vec<usize> {
        let state = featurize(world, call);
        let z = self.norm.normalize(&state).expect("state dimension fixed");
        greedy_subset(&self.net, self.codec.as_ref(), z.as_slice())
    }
}
