//! Per-episode statistics and their aggregation into reports.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sim::RewardLedger;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub total_reward: f64,
    /// Arrival-to-alight, averaged over delivered passengers; 0 when none.
    pub avg_journey_s: f64,
    /// Arrival-to-board, averaged over boarded passengers; 0 when none.
    pub avg_floor_wait_s: f64,
    /// Accumulated movement penalty magnitude.
    pub energy_proxy: f64,
    pub avg_elevators_per_call: f64,
    pub decisions: u64,
    pub delivered: u64,
    pub created: u64,
    pub infra_steps: u64,
    /// Mean subset size per hour of day (0 for hours without calls).
    pub hourly_elevators_per_call: Vec<f64>,
    pub hourly_calls: Vec<u64>,
    /// Episode hit the safety cap before the trace completed.
    pub truncated: bool,
    pub ledger: RewardLedger,
    /// |ledger total - sum of per-decision rewards|, a consistency probe.
    pub reward_gap: f64,
}

/// Means and standard deviations of the headline metrics over a batch of
/// runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub total_reward: f64,
    pub avg_journey_s: f64,
    pub avg_floor_wait_s: f64,
    pub energy_proxy: f64,
    pub avg_elevators_per_call: f64,
    pub decisions: f64,
    pub delivered: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub agent: String,
    pub scale: f64,
    pub runs: Vec<EpisodeStats>,
    pub mean: MetricSummary,
    pub sd: MetricSummary,
}

fn mean_of(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n == 0 {
        return 0.0;
    }
    values.sum::<f64>() / n as f64
}

fn sd_of(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = mean_of(values.clone());
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
}

impl MetricsReport {
    pub fn from_runs(agent: &str, scale: f64, runs: Vec<EpisodeStats>) -> Self {
        macro_rules! agg {
            ($f:ident, $field:tt) => {
                $f(runs.iter().map(|r| r.$field as f64))
            };
        }
        let mean = MetricSummary {
            total_reward: agg!(mean_of, total_reward),
            avg_journey_s: agg!(mean_of, avg_journey_s),
            avg_floor_wait_s: agg!(mean_of, avg_floor_wait_s),
            energy_proxy: agg!(mean_of, energy_proxy),
            avg_elevators_per_call: agg!(mean_of, avg_elevators_per_call),
            decisions: agg!(mean_of, decisions),
            delivered: agg!(mean_of, delivered),
        };
        let sd = MetricSummary {
            total_reward: agg!(sd_of, total_reward),
            avg_journey_s: agg!(sd_of, avg_journey_s),
            avg_floor_wait_s: agg!(sd_of, avg_floor_wait_s),
            energy_proxy: agg!(sd_of, energy_proxy),
            avg_elevators_per_call: agg!(sd_of, avg_elevators_per_call),
            decisions: agg!(sd_of, decisions),
            delivered: agg!(sd_of, delivered),
        };
        Self {
            agent: agent.to_string(),
            scale,
            runs,
            mean,
            sd,
        }
    }

    pub const CSV_HEADER: &'static str = "agent,scale,run,total_reward,avg_journey_s,avg_floor_wait_s,energy_proxy,avg_elevators_per_call,decisions,delivered,truncated";

    fn csv_row(&self, label: &str, s: &MetricSummary, truncated: &str) -> String {
        format!(
            "{},{:.3},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            self.agent,
            self.scale,
            label,
            s.total_reward,
            s.avg_journey_s,
            s.avg_floor_wait_s,
            s.energy_proxy,
            s.avg_elevators_per_call,
            s.decisions,
            s.delivered,
            truncated
        )
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = Vec::with_capacity(self.runs.len() + 2);
        for (i, r) in self.runs.iter().enumerate() {
            rows.push(format!(
                "{},{:.3},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
                self.agent,
                self.scale,
                i,
                r.total_reward,
                r.avg_journey_s,
                r.avg_floor_wait_s,
                r.energy_proxy,
                r.avg_elevators_per_call,
                r.decisions,
                r.delivered,
                r.truncated
            ));
        }
        rows.push(self.csv_row("mean", &self.mean, ""));
        rows.push(self.csv_row("sd", &self.sd, ""));
        rows
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "{}", Self::CSV_HEADER)?;
        for row in self.csv_rows() {
            writeln!(file, "{row}")?;
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("serializable"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(reward: f64) -> EpisodeStats {
        EpisodeStats {
            total_reward: reward,
            avg_journey_s: 30.0,
            avg_floor_wait_s: 10.0,
            energy_proxy: 5.0,
            avg_elevators_per_call: 1.0,
            decisions: 10,
            delivered: 12,
            created: 12,
            infra_steps: 1000,
            hourly_elevators_per_call: vec![0.0; 24],
            hourly_calls: vec![0; 24],
            truncated: false,
            ledger: RewardLedger::default(),
            reward_gap: 0.0,
        }
    }

    #[test]
    fn mean_and_sd_match_hand_values() {
        let report =
            MetricsReport::from_runs("etd", 1.0, vec![stats(1.0), stats(3.0), stats(5.0)]);
        assert!((report.mean.total_reward - 3.0).abs() < 1e-12);
        // sample sd of {1,3,5} = 2
        assert!((report.sd.total_reward - 2.0).abs() < 1e-12);
        assert_eq!(report.sd.avg_journey_s, 0.0);
    }

    #[test]
    fn single_run_has_zero_sd() {
        let report = MetricsReport::from_runs("random", 1.5, vec![stats(-4.0)]);
        assert_eq!(report.sd.total_reward, 0.0);
        assert_eq!(report.runs.len(), 1);
    }

    #[test]
    fn csv_shape_is_stable() {
        let report = MetricsReport::from_runs("etd", 1.0, vec![stats(1.0), stats(2.0)]);
        let rows = report.csv_rows();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].starts_with("etd,1.000,0,"));
        assert!(rows[2].starts_with("etd,1.000,mean,"));
        assert!(rows[3].starts_with("etd,1.000,sd,"));
        let cols = MetricsReport::CSV_HEADER.split(',').count();
        for row in &rows {
            assert_eq!(row.split(',').count(), cols);
        }
    }
}
