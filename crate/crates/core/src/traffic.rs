//! Synthetic passenger traffic: profiles, generation, trace files.
//!
//! The daily pattern is a piecewise-constant-rate Poisson process per hour
//! with an hourly up/down mix (morning up-peak, two-way lunch, softer evening
//! down-peak), geometric group sizes and normal passenger weights.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const HOURS_PER_DAY: usize = 24;
const SECONDS_PER_HOUR: f64 = 3600.0;

/// Minimum sampled passenger weight, kg.
pub const MIN_WEIGHT_KG: f64 = 30.0;

/// Daily arrival pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficProfile {
    /// Arrival-group rate per hour of day (groups/hour).
    pub hourly_rate: [f64; HOURS_PER_DAY],
    /// Probability that a group travels upward, per hour of day.
    pub hourly_up_fraction: [f64; HOURS_PER_DAY],
    /// Geometric success parameter for group size, per hour of day
    /// (group size has support >= 1 and mean 1/p).
    pub group_size_p: [f64; HOURS_PER_DAY],
    pub weight_mean_kg: f64,
    pub weight_sd_kg: f64,
    /// Landing where upward trips start and downward trips end.
    pub lobby_floor: usize,
    /// Landings available for trip endpoints (0..num_landings).
    pub num_landings: usize,
    /// Weekdays this profile describes (1 = Monday .. 7 = Sunday).
    pub days: Vec<u8>,
}

impl Default for TrafficProfile {
    fn default() -> Self {
        // Office-building shape: strong morning up-peak, two-way lunch peak,
        // a flatter evening down-peak, dead hours overnight.
        let hourly_rate = [
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, // 0-5
            20.0, 60.0, 120.0, 100.0, 80.0, 100.0, // 6-11
            140.0, 120.0, 90.0, 80.0, 90.0, 100.0, // 12-17
            60.0, 30.0, 20.0, 10.0, 5.0, 0.0, // 18-23
        ];
        let hourly_up_fraction = [
            0.5, 0.5, 0.5, 0.5, 0.5, 0.5, //
            0.85, 0.9, 0.9, 0.8, 0.65, 0.55, //
            0.5, 0.5, 0.45, 0.4, 0.35, 0.3, //
            0.25, 0.25, 0.25, 0.3, 0.4, 0.5,
        ];
        // Larger groups at the morning, lunch and evening peaks.
        let mut group_size_p = [0.77; HOURS_PER_DAY];
        for h in [8, 12, 13, 17] {
            group_size_p[h] = 0.55;
        }
        Self {
            hourly_rate,
            hourly_up_fraction,
            group_size_p,
            weight_mean_kg: 75.0,
            weight_sd_kg: 10.0,
            lobby_floor: 0,
            num_landings: 16,
            days: vec![1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("profile has no positive arrival rate")]
    EmptyProfile,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("scale factor must be positive (got {0})")]
    BadScale(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
}

impl TrafficProfile {
    pub fn validate(&self) -> Result<(), TrafficError> {
        for (h, &r) in self.hourly_rate.iter().enumerate() {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(TrafficError::InvalidProfile(format!(
                    "hourly_rate[{h}] must be >= 0"
                )));
            }
        }
        for (h, &p) in self.group_size_p.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(TrafficError::InvalidProfile(format!(
                    "group_size_p[{h}] must be in (0, 1]"
                )));
            }
        }
        for (h, &u) in self.hourly_up_fraction.iter().enumerate() {
            if !(0.0..=1.0).contains(&u) {
                return Err(TrafficError::InvalidProfile(format!(
                    "hourly_up_fraction[{h}] must be in [0, 1]"
                )));
            }
        }
        if self.num_landings < 2 {
            return Err(TrafficError::InvalidProfile(
                "num_landings must be >= 2".into(),
            ));
        }
        if self.lobby_floor >= self.num_landings {
            return Err(TrafficError::InvalidProfile(
                "lobby_floor out of range".into(),
            ));
        }
        if !(self.weight_mean_kg > 0.0 && self.weight_sd_kg > 0.0) {
            return Err(TrafficError::InvalidProfile(
                "weight distribution parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Stable content hash, recorded in trace metadata.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("profile serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Mean group size for a given hour (geometric mean = 1/p).
    pub fn mean_group_size(&self, hour: usize) -> f64 {
        1.0 / self.group_size_p[hour]
    }

    pub fn load(path: &Path) -> Result<Self, TrafficError> {
        let text = std::fs::read_to_string(path)?;
        let profile: TrafficProfile = toml::from_str(&text)
            .map_err(|e| TrafficError::InvalidProfile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn save(&self, path: &Path) -> Result<(), TrafficError> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| TrafficError::InvalidProfile(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Multiply the mean group size by `factor`, leaving arrival rates alone.
///
/// The geometric parameter is adjusted so that `1/p' = factor / p`, clamped
/// back into (0, 1].
pub fn scale_profile(profile: &TrafficProfile, factor: f64) -> Result<TrafficProfile, TrafficError> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(TrafficError::BadScale(factor));
    }
    let mut scaled = profile.clone();
    for p in scaled.group_size_p.iter_mut() {
        *p = (*p / factor).clamp(1e-6, 1.0);
    }
    Ok(scaled)
}

/// One arriving passenger group: a single hall call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalGroup {
    pub t_s: f64,
    pub origin: usize,
    #[serde(rename = "dest")]
    pub destination: usize,
    pub weights: Vec<f64>,
}

impl ArrivalGroup {
    pub fn size(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub seed: u64,
    pub scale: f64,
    pub day: u8,
    pub profile_hash: String,
}

/// A full day of arrivals, time-ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficTrace {
    pub meta: TraceMeta,
    pub groups: Vec<ArrivalGroup>,
}

impl TrafficTrace {
    pub fn total_passengers(&self) -> usize {
        self.groups.iter().map(ArrivalGroup::size).sum()
    }
}

/// Draw a full-day trace from the profile.
pub fn generate_trace(
    profile: &TrafficProfile,
    seed: u64,
    day_of_week: u8,
) -> Result<TrafficTrace, TrafficError> {
    profile.validate()?;
    if profile.hourly_rate.iter().all(|&r| r == 0.0) {
        return Ok(TrafficTrace {
            meta: TraceMeta {
                seed,
                scale: 1.0,
                day: day_of_week,
                profile_hash: profile.hash(),
            },
            groups: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight_dist = Normal::new(profile.weight_mean_kg, profile.weight_sd_kg)
        .map_err(|e| TrafficError::InvalidProfile(e.to_string()))?;
    let mut groups = Vec::new();
    for hour in 0..HOURS_PER_DAY {
        let rate = profile.hourly_rate[hour];
        if rate <= 0.0 {
            continue;
        }
        let exp = Exp::new(rate / SECONDS_PER_HOUR)
            .map_err(|e| TrafficError::InvalidProfile(e.to_string()))?;
        let geom = Geometric::new(profile.group_size_p[hour])
            .map_err(|e| TrafficError::InvalidProfile(e.to_string()))?;
        let hour_start = hour as f64 * SECONDS_PER_HOUR;
        let hour_end = hour_start + SECONDS_PER_HOUR;
        let mut t = hour_start + exp.sample(&mut rng);
        while t < hour_end {
            let size = 1 + geom.sample(&mut rng) as usize;
            let upward = rng.random_bool(profile.hourly_up_fraction[hour]);
            let (origin, destination) = sample_trip(profile, upward, &mut rng);
            let weights = (0..size)
                .map(|_| loop {
                    let w = weight_dist.sample(&mut rng);
                    if w >= MIN_WEIGHT_KG {
                        break w;
                    }
                })
                .collect();
            groups.push(ArrivalGroup {
                t_s: t,
                origin,
                destination,
                weights,
            });
            t += exp.sample(&mut rng);
        }
    }
    Ok(TrafficTrace {
        meta: TraceMeta {
            seed,
            scale: 1.0,
            day: day_of_week,
            profile_hash: profile.hash(),
        },
        groups,
    })
}

/// Upward trips start at the lobby with a uniform destination above it;
/// downward trips mirror that.
fn sample_trip(profile: &TrafficProfile, upward: bool, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let lobby = profile.lobby_floor;
    let other = sample_non_lobby(profile, rng);
    if upward {
        (lobby, other)
    } else {
        (other, lobby)
    }
}

fn sample_non_lobby(profile: &TrafficProfile, rng: &mut ChaCha8Rng) -> usize {
    let f = rng.random_range(0..profile.num_landings - 1);
    if f >= profile.lobby_floor {
        f + 1
    } else {
        f
    }
}

pub fn save_trace(trace: &TrafficTrace, path: &Path) -> Result<(), TrafficError> {
    let mut writer = BufWriter::new(File::create(path)?);
    writeln!(writer, "{}", serde_json::to_string(&trace.meta).unwrap())?;
    for group in &trace.groups {
        writeln!(writer, "{}", serde_json::to_string(group).unwrap())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_trace(path: &Path) -> Result<TrafficTrace, TrafficError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or(TrafficError::Schema {
        line: 1,
        message: "empty file, expected metadata header".into(),
    })?;
    let meta: TraceMeta = serde_json::from_str(&header?).map_err(|e| TrafficError::Schema {
        line: 1,
        message: e.to_string(),
    })?;
    let mut groups: Vec<ArrivalGroup> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let group: ArrivalGroup =
            serde_json::from_str(&line).map_err(|e| TrafficError::Schema {
                line: line_no,
                message: e.to_string(),
            })?;
        if group.weights.is_empty() {
            return Err(TrafficError::Schema {
                line: line_no,
                message: "group has no members".into(),
            });
        }
        if group.origin == group.destination {
            return Err(TrafficError::Schema {
                line: line_no,
                message: "origin equals destination".into(),
            });
        }
        if let Some(prev) = groups.last() {
            if group.t_s < prev.t_s {
                return Err(TrafficError::Schema {
                    line: line_no,
                    message: "arrival times must be non-decreasing".into(),
                });
            }
        }
        groups.push(group);
    }
    Ok(TrafficTrace { meta, groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_gives_empty_trace() {
        let profile = TrafficProfile {
            hourly_rate: [0.0; 24],
            ..Default::default()
        };
        let trace = generate_trace(&profile, 7, 1).unwrap();
        assert!(trace.groups.is_empty());
    }

    #[test]
    fn degenerate_geometric_gives_singleton_groups() {
        let profile = TrafficProfile {
            group_size_p: [1.0; 24],
            ..Default::default()
        };
        let trace = generate_trace(&profile, 3, 2).unwrap();
        assert!(!trace.groups.is_empty());
        assert!(trace.groups.iter().all(|g| g.size() == 1));
    }

    #[test]
    fn poisson_rate_matches_within_three_sigma() {
        // Hour 12 at 60 groups/hour: over 100 seeds the mean count is within
        // 3 standard errors of 60 (count variance = lambda for Poisson).
        let mut profile = TrafficProfile::default();
        profile.hourly_rate = [0.0; 24];
        profile.hourly_rate[12] = 60.0;
        let seeds = 100;
        let mut total = 0usize;
        for seed in 0..seeds {
            total += generate_trace(&profile, seed, 1).unwrap().groups.len();
        }
        let mean = total as f64 / seeds as f64;
        let three_se = 3.0 * (60.0f64 / seeds as f64).sqrt();
        assert!(
            (mean - 60.0).abs() < three_se,
            "mean {mean} outside 60 +/- {three_se}"
        );
    }

    #[test]
    fn group_size_mean_matches_geometric() {
        // p = 0.55 -> mean 1/0.55; check the empirical mean over many draws
        // stays within 3 standard errors. Geometric(+1) variance = (1-p)/p^2.
        let mut profile = TrafficProfile::default();
        profile.hourly_rate = [0.0; 24];
        profile.hourly_rate[10] = 2000.0;
        profile.group_size_p = [0.55; 24];
        let trace = generate_trace(&profile, 11, 1).unwrap();
        let n = trace.groups.len() as f64;
        let mean: f64 = trace.groups.iter().map(|g| g.size() as f64).sum::<f64>() / n;
        let sd = (0.45f64 / (0.55f64 * 0.55)).sqrt();
        let three_se = 3.0 * sd / n.sqrt();
        assert!(
            (mean - 1.0 / 0.55).abs() < three_se,
            "mean {mean} vs {} +/- {three_se}",
            1.0 / 0.55
        );
    }

    #[test]
    fn direction_mix_matches_profile() {
        let mut profile = TrafficProfile::default();
        profile.hourly_rate = [0.0; 24];
        profile.hourly_rate[8] = 1500.0;
        profile.hourly_up_fraction = [0.9; 24];
        let trace = generate_trace(&profile, 5, 1).unwrap();
        let n = trace.groups.len() as f64;
        let up = trace
            .groups
            .iter()
            .filter(|g| g.destination > g.origin)
            .count() as f64;
        let frac = up / n;
        let three_se = 3.0 * (0.9f64 * 0.1 / n).sqrt();
        assert!((frac - 0.9).abs() < three_se, "up fraction {frac}");
    }

    #[test]
    fn trips_are_lobby_centric_and_valid() {
        let profile = TrafficProfile::default();
        let trace = generate_trace(&profile, 42, 3).unwrap();
        for g in &trace.groups {
            assert_ne!(g.origin, g.destination);
            assert!(g.origin == 0 || g.destination == 0);
            assert!(g.origin < 16 && g.destination < 16);
            assert!(g.weights.iter().all(|&w| w >= MIN_WEIGHT_KG));
        }
        // strictly ordered per hour by construction; globally non-decreasing
        for pair in trace.groups.windows(2) {
            assert!(pair[0].t_s <= pair[1].t_s);
        }
    }

    #[test]
    fn same_seed_reproduces_trace() {
        let profile = TrafficProfile::default();
        let a = generate_trace(&profile, 99, 4).unwrap();
        let b = generate_trace(&profile, 99, 4).unwrap();
        assert_eq!(a, b);
        let c = generate_trace(&profile, 100, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn scale_identity_and_mean_adjustment() {
        let profile = TrafficProfile::default();
        assert_eq!(scale_profile(&profile, 1.0).unwrap(), profile);
        // 1.5x on off-peak mean 1/0.77 -> 1.5/0.77 (~1.95)
        let busier = scale_profile(&profile, 1.5).unwrap();
        let expected = 1.5 / 0.77;
        assert!((busier.mean_group_size(0) - expected).abs() < 1e-12);
        assert_eq!(busier.hourly_rate, profile.hourly_rate);
        assert!(scale_profile(&profile, 0.0).is_err());
        assert!(scale_profile(&profile, -2.0).is_err());
    }

    #[test]
    fn scaled_mean_verified_by_sampling() {
        // factor 2.0 on mean-1.3 groups -> mean 2.6, checked within 2% over
        // a large sample.
        let mut profile = TrafficProfile::default();
        profile.group_size_p = [0.77; 24];
        profile.hourly_rate = [0.0; 24];
        profile.hourly_rate[9] = 10_000.0;
        let scaled = scale_profile(&profile, 2.0).unwrap();
        let mut sizes = 0usize;
        let mut count = 0usize;
        for seed in 0..12 {
            let t = generate_trace(&scaled, seed, 1).unwrap();
            sizes += t.total_passengers();
            count += t.groups.len();
        }
        assert!(count > 100_000, "need a large sample, got {count}");
        let mean = sizes as f64 / count as f64;
        let target = 2.0 / 0.77;
        assert!(
            (mean - target).abs() / target < 0.02,
            "mean {mean} vs {target}"
        );
    }

    #[test]
    fn trace_roundtrip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        let profile = TrafficProfile::default();
        let trace = generate_trace(&profile, 17, 2).unwrap();
        assert!(!trace.groups.is_empty());
        save_trace(&trace, &path).unwrap();
        let loaded = load_trace(&path).unwrap();
        assert_eq!(trace, loaded);
    }

    #[test]
    fn empty_trace_roundtrip_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        let profile = TrafficProfile {
            hourly_rate: [0.0; 24],
            ..Default::default()
        };
        let trace = generate_trace(&profile, 1, 1).unwrap();
        save_trace(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(load_trace(&path).unwrap(), trace);
    }

    #[test]
    fn load_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"seed\":1,\"scale\":1.0,\"day\":1,\"profile_hash\":\"x\"}\n{\"t_s\":5.0,\"origin\":3,\"dest\":3,\"weights\":[70.0]}\n",
        )
        .unwrap();
        match load_trace(&path) {
            Err(TrafficError::Schema { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("origin"));
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }
}
