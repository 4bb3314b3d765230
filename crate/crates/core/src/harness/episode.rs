//! Drive one policy through one trace to termination, collecting statistics.

use std::path::Path;

use crate::config::BuildingConfig;
use crate::dispatch::Policy;
use crate::sim::{EventLog, SimError, World, WorldOptions};
use crate::traffic::TrafficTrace;

use super::metrics::EpisodeStats;

/// One full environment run. The safety cap bounds pathological policies
/// (for example a branching agent that keeps sending nobody); a capped run
/// is flagged `truncated` instead of looping forever.
pub fn run_episode(
    building: &BuildingConfig,
    opts: &WorldOptions,
    trace: &TrafficTrace,
    policy: &mut dyn Policy,
    max_infra_steps: u64,
    event_log: Option<&Path>,
) -> Result<EpisodeStats, SimError> {
    let mut world = World::new(building.clone(), trace, opts.clone())?;
    if let Some(path) = event_log {
        world.attach_event_log(EventLog::create(path).map_err(|e| {
            SimError::InvalidTrace(format!("cannot create event log: {e}"))
        })?);
    }
    let mut decision_reward_sum = 0.0;
    let mut subset_size_sum = 0u64;
    let mut decisions = 0u64;
    let mut hourly_subset_sums = vec![0u64; 24];
    let mut hourly_calls = vec![0u64; 24];
    let mut truncated = false;

    loop {
        let point = world.run_until_next_decision()?;
        decision_reward_sum += point.rewards.iter().sum::<f64>();
        if point.terminal {
            break;
        }
        if world.clock_steps() > max_infra_steps {
            truncated = true;
            break;
        }
        let call_id = point.call.expect("non-terminal decision carries a call");
        let subset = policy.decide(&world, call_id);
        let hour = ((world.clock_s() / 3600.0) as usize).min(23);
        world.apply_dispatch(call_id, &subset)?;
        decisions += 1;
        subset_size_sum += subset.len() as u64;
        hourly_subset_sums[hour] += subset.len() as u64;
        hourly_calls[hour] += 1;
    }
    world.flush_event_log().ok();

    let mut journey_sum = 0.0;
    let mut journey_n = 0u64;
    let mut wait_sum = 0.0;
    let mut wait_n = 0u64;
    for p in world.passengers() {
        if let Some(j) = p.journey_s() {
            journey_sum += j;
            journey_n += 1;
        }
        if let Some(w) = p.floor_wait_s() {
            wait_sum += w;
            wait_n += 1;
        }
    }
    let ledger = world.ledger().clone();
    let hourly_epc = hourly_subset_sums
        .iter()
        .zip(&hourly_calls)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s as f64 / c as f64 })
        .collect();
    Ok(EpisodeStats {
        total_reward: ledger.total(),
        avg_journey_s: if journey_n == 0 {
            0.0
        } else {
            journey_sum / journey_n as f64
        },
        avg_floor_wait_s: if wait_n == 0 {
            0.0
        } else {
            wait_sum / wait_n as f64
        },
        energy_proxy: -ledger.moving,
        avg_elevators_per_call: if decisions == 0 {
            0.0
        } else {
            subset_size_sum as f64 / decisions as f64
        },
        decisions,
        delivered: world.delivered_count() as u64,
        created: world.created_count() as u64,
        infra_steps: world.clock_steps(),
        hourly_elevators_per_call: hourly_epc,
        hourly_calls,
        truncated,
        reward_gap: (ledger.total() - decision_reward_sum).abs(),
        ledger,
    })
}
