//! Test-environment evaluation: independent episodes on sub-seeded traces,
//! aggregated into a metrics report.

use std::path::Path;

use crate::dispatch::Policy;
use crate::features::NormStats;
use crate::rl::{ActionCodec, Checkpoint, RlPolicy};
use crate::sim::WorldOptions;
use crate::traffic::{generate_trace, scale_profile, TrafficProfile};

use super::config::{derive_seed, AgentKind, RunConfig};
use super::error::HarnessError;
use super::metrics::MetricsReport;
use super::run_episode;

/// Traffic profile for a run: configured file or the built-in default,
/// with the busier-scenario scale applied.
pub fn load_profile(config: &RunConfig) -> Result<TrafficProfile, HarnessError> {
    let base = match &config.traffic.profile_path {
        Some(path) => TrafficProfile::load(path)?,
        None => TrafficProfile::default(),
    };
    Ok(scale_profile(&base, config.traffic.scale)?)
}

/// Build the configured policy; RL kinds are restored from their checkpoint
/// and bound to the normalization statistics they trained under.
pub fn build_policy(config: &RunConfig) -> Result<Box<dyn Policy>, HarnessError> {
    if let Some(policy) = super::policies::rule_policy(
        config.agent.kind,
        derive_seed(config.run.master_seed, "rule-policy"),
    ) {
        return Ok(policy);
    }
    let ckpt_path = config.agent.checkpoint.as_ref().ok_or_else(|| {
        HarnessError::Config(format!(
            "agent '{}' needs agent.checkpoint",
            config.agent.kind
        ))
    })?;
    let ckpt = Checkpoint::load(ckpt_path)?;
    let norm_path = match &config.agent.norm_stats {
        Some(p) => p.clone(),
        None => ckpt_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("norm_stats.json"),
    };
    let norm = NormStats::load(&norm_path)?;
    if norm.hash() != ckpt.norm_stats_hash {
        return Err(HarnessError::Config(format!(
            "normalization statistics {} do not match the checkpoint (hash {} vs {})",
            norm_path.display(),
            norm.hash(),
            ckpt.norm_stats_hash
        )));
    }
    let net = ckpt.restore_net()?;
    let codec = match config.agent.kind {
        AgentKind::RlCombinatorial => Some(ActionCodec::new(ckpt.num_elevators, ckpt.max_subset)),
        _ => None,
    };
    Ok(Box::new(RlPolicy { net, norm, codec }))
}

pub fn world_options(config: &RunConfig) -> WorldOptions {
    WorldOptions {
        max_subset: config.agent.max_subset,
        empty_dispatch_allowed: config.agent.kind == AgentKind::RlBranching,
        fast_forward: true,
    }
}

/// Run the configured number of test episodes on distinct sub-seeded traces.
pub fn evaluate_report(config: &RunConfig) -> Result<MetricsReport, HarnessError> {
    config.validate()?;
    let profile = load_profile(config)?;
    let mut policy = build_policy(config)?;
    let opts = world_options(config);
    let mut runs = Vec::with_capacity(config.run.test_episodes);
    for i in 0..config.run.test_episodes {
        let trace = generate_trace(
            &profile,
            derive_seed(config.test_seed(), &format!("ep-{i}")),
            config.traffic.day,
        )?;
        runs.push(run_episode(
            &config.building,
            &opts,
            &trace,
            policy.as_mut(),
            config.max_episode_steps(),
            None,
        )?);
    }
    Ok(MetricsReport::from_runs(
        config.agent.kind.name(),
        config.traffic.scale,
        runs,
    ))
}

/// Evaluate and persist `metrics.csv` + `metrics.json` into `out_dir`.
pub fn evaluate(config: &RunConfig, out_dir: &Path) -> Result<MetricsReport, HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let report = evaluate_report(config)?;
    report.write_csv(&out_dir.join("metrics.csv"))?;
    report.write_json(&out_dir.join("metrics.json"))?;
    Ok(report)
}
