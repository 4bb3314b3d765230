//! The training loop: epsilon-greedy acting on the train environment,
//! replay learning every few steps, hard target syncs, periodic greedy
//! validation, and best-checkpoint selection.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{
    accumulate_fixed, accumulate_variable, calibrate_gamma_infra, featurize, DiscountSpec,
    NormStats, StateVector,
};
use crate::rl::{
    select_branching, select_combinatorial, sync_target, train_step, ActionCodec, AdamW,
    AdamWConfig, Checkpoint, CosineLr, EpsilonSchedule, HeadSpec, QNetwork, ReplayBuffer,
    Transition,
};
use crate::sim::{World, WorldOptions};
use crate::traffic::{generate_trace, TrafficTrace};

use super::config::{derive_seed, AgentKind, RunConfig};
use super::error::HarnessError;
use super::evaluate::load_profile;
use super::metrics::MetricsReport;
use super::policies::GreedyRef;
use super::run_episode;

/// Everything a finished training run leaves on disk, plus headline numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSummary {
    pub agent: String,
    pub env_steps: u64,
    pub train_steps: u64,
    pub avg_infra_per_decision: f64,
    pub gamma_infra: f64,
    pub pretrain_val_reward: f64,
    pub best_val_reward: f64,
    pub best_val_step: u64,
    pub final_val_reward: f64,
    pub checkpoint: PathBuf,
    pub norm_stats: PathBuf,
    pub curve: PathBuf,
}

struct CurveWriter {
    file: std::fs::File,
}

impl CurveWriter {
    fn create(path: &Path) -> std::io::Result<Self> {
        let mut file = std::fs::File::create(path)?;
        writeln!(
            file,
            "env_step,epsilon,lr,loss_mean,train_reward_mean,train_elev_per_call,\
             val_reward_mean,val_reward_sd,val_journey_s,val_floor_wait_s,val_energy,\
             val_elev_per_call"
        )?;
        Ok(Self { file })
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        env_step: u64,
        epsilon: f64,
        lr: f64,
        loss_mean: f64,
        train_reward: f64,
        train_epc: f64,
        val: &MetricsReport,
    ) -> std::io::Result<()> {
        writeln!(
            self.file,
            "{},{:.6},{:.8},{:.8},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            env_step,
            epsilon,
            lr,
            loss_mean,
            train_reward,
            train_epc,
            val.mean.total_reward,
            val.sd.total_reward,
            val.mean.avg_journey_s,
            val.mean.avg_floor_wait_s,
            val.mean.energy_proxy,
            val.mean.avg_elevators_per_call,
        )
    }
}

/// Collect decision states under the random dispatcher to fit normalization
/// statistics, measuring the average decision gap along the way.
fn fit_normalization(
    config: &RunConfig,
    opts: &WorldOptions,
    trace: &TrafficTrace,
) -> Result<(NormStats, f64), HarnessError> {
    let want = config.training.norm_states.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.run.master_seed, "norm-rollout"));
    let mut states: Vec<StateVector> = Vec::with_capacity(want);
    let mut gap_steps: u64 = 0;
    let mut decisions: u64 = 0;
    // Rule-based collection never sends empty subsets.
    let collect_opts = WorldOptions {
        empty_dispatch_allowed: false,
        ..opts.clone()
    };
    while states.len() < want {
        let mut world = World::new(config.building.clone(), trace, collect_opts.clone())?;
        let mut point = world.run_until_next_decision()?;
        if point.terminal {
            return Err(HarnessError::Config(
                "train trace has no arrivals; cannot fit normalization".into(),
            ));
        }
        while !point.terminal && states.len() < want {
            let call = point.call.expect("non-terminal point");
            states.push(featurize(&world, call));
            gap_steps += point.n_infra() as u64;
            decisions += 1;
            let cart = rng.random_range(0..config.building.num_elevators);
            world.apply_dispatch(call, &[cart])?;
            point = world.run_until_next_decision()?;
        }
    }
    let stats = NormStats::fit(&states)?;
    let avg_n = (gap_steps as f64 / decisions as f64).max(1.0);
    Ok((stats, avg_n))
}

/// Train an RL agent per the run configuration, writing the best-validation
/// checkpoint, the normalization statistics, the learning-curve log and a
/// summary into `out_dir`.
pub fn train(config: &RunConfig, out_dir: &Path) -> Result<TrainSummary, HarnessError> {
    config.validate()?;
    if !config.agent.kind.is_rl() {
        return Err(HarnessError::Config(format!(
            "agent '{}' is rule-based; nothing to train",
            config.agent.kind
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let profile = load_profile(config)?;
    let day = config.traffic.day;
    let train_trace = generate_trace(&profile, config.train_seed(), day)?;
    let val_traces: Vec<TrafficTrace> = (0..config.run.val_episodes)
        .map(|i| generate_trace(&profile, derive_seed(config.val_seed(), &format!("ep-{i}")), day))
        .collect::<Result<_, _>>()?;

    let branching = config.agent.kind == AgentKind::RlBranching;
    let opts = WorldOptions {
        max_subset: config.agent.max_subset,
        empty_dispatch_allowed: branching,
        fast_forward: true,
    };

    println!(
        "fitting normalization on {} random-policy decision states...",
        config.training.norm_states
    );
    let (norm, avg_n) = fit_normalization(config, &opts, &train_trace)?;
    let gamma_infra = calibrate_gamma_infra(config.discount.gamma_step, avg_n)?;
    let discount = DiscountSpec {
        scheme: config.discount.scheme,
        gamma_step: config.discount.gamma_step,
        gamma_infra: Some(gamma_infra),
    };
    let norm_stats_path = out_dir.join("norm_stats.json");
    norm.save(&norm_stats_path)?;
    println!(
        "avg infra-steps per decision: {avg_n:.1}; gamma_infra = {gamma_infra:.8}"
    );

    let num_elevators = config.building.num_elevators;
    let input_dim = crate::features::state_dim(num_elevators);
    let codec = ActionCodec::new(num_elevators, config.agent.max_subset);
    let head = if branching {
        HeadSpec::Branching {
            branches: num_elevators,
            branch_hidden: config.training.branch_hidden,
        }
    } else {
        HeadSpec::Combinatorial {
            actions: codec.num_actions(),
        }
    };
    let mut net_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.run.master_seed, "net-init"));
    let mut online = QNetwork::new(input_dim, &config.training.hidden, head, &mut net_rng);
    let mut target = online.clone();
    let mut opt = AdamW::new(
        &online,
        AdamWConfig {
            weight_decay: config.training.weight_decay,
            ..Default::default()
        },
    );
    let mut buffer = ReplayBuffer::new(config.training.buffer_capacity);
    let epsilon = EpsilonSchedule::new(
        config.training.epsilon_start,
        config.training.epsilon_end,
        config.training.steps,
        config.training.epsilon_floor_fraction,
    );
    let lr = CosineLr {
        base: config.training.learning_rate,
        total: (config.training.steps / config.training.learn_interval).max(1),
    };
    let mut actor_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.run.master_seed, "actor"));
    let mut replay_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.run.master_seed, "replay"));

    let run_validation = |net: &QNetwork| -> Result<MetricsReport, HarnessError> {
        let mut runs = Vec::with_capacity(val_traces.len());
        for trace in &val_traces {
            let mut policy = GreedyRef {
                net,
                codec: if branching { None } else { Some(&codec) },
                norm: &norm,
            };
            runs.push(run_episode(
                &config.building,
                &opts,
                trace,
                &mut policy,
                config.max_episode_steps(),
                None,
            )?);
        }
        Ok(MetricsReport::from_runs(
            config.agent.kind.name(),
            config.traffic.scale,
            runs,
        ))
    };

    // Pre-training baseline: fully exploratory acting on the validation
    // environments.
    let pretrain = {
        let mut runs = Vec::with_capacity(val_traces.len());
        let mut policy = super::policies::EpsilonPolicy::new(
            &online,
            if branching { None } else { Some(&codec) },
            &norm,
            1.0,
            derive_seed(config.run.master_seed, "pretrain-val"),
        );
        for trace in &val_traces {
            runs.push(run_episode(
                &config.building,
                &opts,
                trace,
                &mut policy,
                config.max_episode_steps(),
                None,
            )?);
        }
        MetricsReport::from_runs(config.agent.kind.name(), config.traffic.scale, runs)
    };
    println!(
        "pre-training validation reward (epsilon = 1): {:.1}",
        pretrain.mean.total_reward
    );

    let curve_path = out_dir.join("curve.csv");
    let mut curve = CurveWriter::create(&curve_path)?;

    let mut world = World::new(config.building.clone(), &train_trace, opts.clone())?;
    let mut point = world.run_until_next_decision()?;
    let mut train_steps: u64 = 0;
    let mut losses: Vec<f64> = Vec::new();
    let mut episode_rewards: Vec<f64> = Vec::new();
    let mut window_subset_sum: u64 = 0;
    let mut window_decisions: u64 = 0;
    let mut best: Option<(f64, u64, Checkpoint)> = None;
    let mut final_val = f64::NAN;

    for step in 1..=config.training.steps {
        if point.terminal {
            episode_rewards.push(world.ledger().total());
            world = World::new(config.building.clone(), &train_trace, opts.clone())?;
            point = world.run_until_next_decision()?;
            if point.terminal {
                return Err(HarnessError::Config("train trace has no arrivals".into()));
            }
        }
        let call = point.call.expect("non-terminal point");
        let state = norm.normalize(&featurize(&world, call))?;
        let eps = epsilon.value(step - 1);
        let (subset, repr) = if branching {
            select_branching(&online, state.as_slice(), eps, &mut actor_rng)
        } else {
            select_combinatorial(&online, &codec, state.as_slice(), eps, &mut actor_rng)
        };
        world.apply_dispatch(call, &subset)?;
        window_subset_sum += subset.len() as u64;
        window_decisions += 1;

        point = world.run_until_next_decision()?;
        let reward_fixed = accumulate_fixed(&point.rewards);
        let (reward_variable, _) = accumulate_variable(&point.rewards, gamma_infra);
        let next_state = if point.terminal {
            vec![0.0; input_dim]
        } else {
            norm.normalize(&featurize(&world, point.call.expect("non-terminal")))?
                .0
        };
        buffer.push(Transition {
            state: state.0,
            action: repr,
            reward_fixed,
            reward_variable,
            n_infra: point.n_infra() as u32,
            next_state,
            terminal: point.terminal,
        });

        if step % config.training.learn_interval == 0 {
            let rate = lr.value(train_steps);
            if let Some(loss) = train_step(
                &mut online,
                &target,
                &buffer,
                &mut opt,
                rate,
                config.training.batch_size,
                config.training.buffer_min,
                &discount,
                &mut replay_rng,
            )? {
                if !loss.is_finite() {
                    return Err(HarnessError::Diverged { step, loss });
                }
                losses.push(loss);
                train_steps += 1;
                if train_steps % config.training.target_sync_interval == 0 {
                    sync_target(&online, &mut target)?;
                }
            }
        }

        let at_eval = step % config.training.eval_interval == 0 || step == config.training.steps;
        if at_eval {
            let val = run_validation(&online)?;
            let loss_mean = if losses.is_empty() {
                0.0
            } else {
                losses.iter().sum::<f64>() / losses.len() as f64
            };
            let train_reward = if episode_rewards.is_empty() {
                f64::NAN
            } else {
                episode_rewards.iter().sum::<f64>() / episode_rewards.len() as f64
            };
            let train_epc = if window_decisions == 0 {
                0.0
            } else {
                window_subset_sum as f64 / window_decisions as f64
            };
            curve.row(
                step,
                epsilon.value(step),
                lr.value(train_steps),
                loss_mean,
                train_reward,
                train_epc,
                &val,
            )?;
            println!(
                "step {step}: eps {:.3}, loss {loss_mean:.5}, val reward {:.1} (sd {:.1})",
                epsilon.value(step),
                val.mean.total_reward,
                val.sd.total_reward
            );
            losses.clear();
            episode_rewards.clear();
            window_subset_sum = 0;
            window_decisions = 0;
            final_val = val.mean.total_reward;
            if best.as_ref().map_or(true, |(b, _, _)| val.mean.total_reward > *b) {
                let ckpt = Checkpoint::capture(
                    &online,
                    &opt,
                    &actor_rng,
                    step,
                    train_steps,
                    num_elevators,
                    config.agent.max_subset,
                    discount,
                    norm.hash(),
                );
                best = Some((val.mean.total_reward, step, ckpt));
            }
        }
    }

    let (best_val_reward, best_val_step, best_ckpt) =
        best.expect("at least one validation pass runs");
    let checkpoint_path = out_dir.join("checkpoint.json");
    best_ckpt.save(&checkpoint_path)?;

    let summary = TrainSummary {
        agent: config.agent.kind.name().to_string(),
        env_steps: config.training.steps,
        train_steps,
        avg_infra_per_decision: avg_n,
        gamma_infra,
        pretrain_val_reward: pretrain.mean.total_reward,
        best_val_reward,
        best_val_step,
        final_val_reward: final_val,
        checkpoint: checkpoint_path,
        norm_stats: norm_stats_path,
        curve: curve_path,
    };
    std::fs::write(
        out_dir.join("train_summary.json"),
        serde_json::to_string_pretty(&summary).expect("serializable"),
    )?;
    println!(
        "best validation reward {best_val_reward:.1} at step {best_val_step}; checkpoint: {}",
        summary.checkpoint.display()
    );
    Ok(summary)
}
