//! Head-to-head comparison across agents and busier-scenario scales.

use std::io::Write;
use std::path::Path;

use super::config::RunConfig;
use super::error::HarnessError;
use super::evaluate::evaluate_report;
use super::metrics::MetricsReport;

/// Evaluate every configuration (same building, same test seeds) and write
/// one aligned summary table.
pub fn compare(configs: &[RunConfig], out_dir: &Path) -> Result<Vec<MetricsReport>, HarnessError> {
    if configs.len() < 2 {
        return Err(HarnessError::Config(
            "compare needs at least two runs".into(),
        ));
    }
    let first = &configs[0];
    for cfg in &configs[1..] {
        if cfg.building != first.building {
            return Err(HarnessError::Config(
                "compared runs must share one building configuration".into(),
            ));
        }
        if cfg.test_seed() != first.test_seed() || cfg.traffic.day != first.traffic.day {
            return Err(HarnessError::Config(
                "compared runs must share the test environment seeds".into(),
            ));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in configs {
        println!(
            "evaluating {} at scale {:.2}...",
            cfg.agent.kind,
            cfg.traffic.scale
        );
        reports.push(evaluate_report(cfg)?);
    }
    write_table(&reports, &out_dir.join("compare.csv"))?;
    Ok(reports)
}

pub fn write_table(reports: &[MetricsReport], path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(
        file,
        "agent,scale,total_reward_mean,total_reward_sd,avg_journey_s_mean,avg_journey_s_sd,\
         avg_floor_wait_s_mean,avg_floor_wait_s_sd,energy_proxy_mean,energy_proxy_sd,\
         avg_elevators_per_call_mean,avg_elevators_per_call_sd,decisions_mean,delivered_mean,runs"
    )?;
    for r in reports {
        writeln!(
            file,
            "{},{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            r.agent,
            r.scale,
            r.mean.total_reward,
            r.sd.total_reward,
            r.mean.avg_journey_s,
            r.sd.avg_journey_s,
            r.mean.avg_floor_wait_s,
            r.sd.avg_floor_wait_s,
            r.mean.energy_proxy,
            r.sd.energy_proxy,
            r.mean.avg_elevators_per_call,
            r.sd.avg_elevators_per_call,
            r.mean.decisions,
            r.mean.delivered,
            r.runs.len()
        )?;
    }
    Ok(())
}
