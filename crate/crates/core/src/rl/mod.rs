//! Dueling double deep Q-learning: networks, action codec, replay,
//! schedules, optimizer, and training targets.

pub mod agent;
pub mod checkpoint;
pub mod codec;
pub mod net;
pub mod optim;
pub mod replay;
pub mod schedule;

pub use agent::{
    ddqn_targets, greedy_subset, huber, huber_grad, loss_and_grads, mask_to_subset,
    select_branching, select_combinatorial, sync_target, train_step, RlPolicy, TargetValues,
};
pub use checkpoint::{Checkpoint, CheckpointError};
pub use codec::{ActionCodec, CodecError};
pub use net::{argmax_rows, HeadSpec, NetError, QGrad, QNetwork, QOut};
pub use optim::{AdamW, AdamWConfig, CosineLr};
pub use replay::{ActionRepr, ReplayBuffer, Transition};
pub use schedule::EpsilonSchedule;
