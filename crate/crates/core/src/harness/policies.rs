//! Policy construction for every agent kind, including epsilon-greedy and
//! greedy wrappers around a Q-network.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dispatch::{EtdPolicy, Policy, SimpleKind, SimplePolicy};
use crate::features::{featurize, NormStats};
use crate::rl::{select_branching, select_combinatorial, ActionCodec, QNetwork};
use crate::sim::{CallId, World};

use super::config::AgentKind;

/// Rule-based policy for the given kind. RL kinds are built from
/// checkpoints elsewhere.
pub fn rule_policy(kind: AgentKind, seed: u64) -> Option<Box<dyn Policy>> {
    let simple = |k: SimpleKind| -> Box<dyn Policy> { Box::new(SimplePolicy::new(k, seed)) };
    Some(match kind {
        AgentKind::Etd => Box::new(EtdPolicy),
        AgentKind::Random => simple(SimpleKind::Random),
        AgentKind::First => simple(SimpleKind::First),
        AgentKind::Closest => simple(SimpleKind::Closest),
        AgentKind::Sector => simple(SimpleKind::Sector),
        AgentKind::LeastBusy => simple(SimpleKind::LeastBusy),
        AgentKind::RlCombinatorial | AgentKind::RlBranching => return None,
    })
}

/// Epsilon-greedy actor over a borrowed network; used for the pre-training
/// baseline and any exploratory evaluation.
pub struct EpsilonPolicy<'a> {
    pub net: &'a QNetwork,
    pub codec: Option<&'a ActionCodec>,
    pub norm: &'a NormStats,
    pub epsilon: f64,
    pub rng: ChaCha8Rng,
}

impl<'a> EpsilonPolicy<'a> {
    pub fn new(
        net: &'a QNetwork,
        codec: Option<&'a ActionCodec>,
        norm: &'a NormStats,
        epsilon: f64,
        seed: u64,
    ) -> Self {
        Self {
            net,
            codec,
            norm,
            epsilon,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for EpsilonPolicy<'_> {
    fn decide(&mut self, world: &World, call: CallId) -> Vec<usize> {
        let state = featurize(world, call);
        let z = self.norm.normalize(&state).expect("fixed state dimension");
        match self.codec {
            Some(codec) => {
                select_combinatorial(self.net, codec, z.as_slice(), self.epsilon, &mut self.rng).0
            }
            None => select_branching(self.net, z.as_slice(), self.epsilon, &mut self.rng).0,
        }
    }
}

/// Greedy evaluation over a borrowed network.
pub struct GreedyRef<'a> {
    pub net: &'a QNetwork,
    pub codec: Option<&'a ActionCodec>,
    pub norm: &'a NormStats,
}

impl Policy for GreedyRef<'_> {
    fn decide(&mut self, world: &World, call: CallId) -> Vec<usize> {
        let state = featurize(world, call);
        let z = self.norm.normalize(&state).expect("fixed state dimension");
        crate::rl::greedy_subset(self.net, self.codec, z.as_slice())
    }
}
