//! Rule-based dispatchers: the estimated-time-to-destination (ETD) cost
//! baseline and five simpler agents, all behind the policy interface shared
//! with the learned agents.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{BuildingConfig, INFRA_STEP_S};
use crate::sim::call::{CallId, CallStatus, HallCall};
use crate::sim::elevator::{Elevator, ElevatorId, Phase};
use crate::sim::kinematics::{brake_distance, MotionProfile};
use crate::sim::sweep::{select_next, DestinationQueue, Direction, NextMove, POS_EPS};
use crate::sim::{steps_ceil, World};

/// One decision: which carts answer a call. Rule-based agents always pick
/// exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchDecision {
    pub call: CallId,
    pub elevators: Vec<ElevatorId>,
}

/// Anything that can answer a pending hall call.
pub trait Policy {
    fn decide(&mut self, world: &World, call: CallId) -> Vec<ElevatorId>;
}

/// The five simple baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleKind {
    /// Uniformly random cart.
    Random,
    /// Always cart 0.
    First,
    /// Cart physically closest to the call landing.
    Closest,
    /// The building is split into `num_elevators` contiguous zones; the
    /// zone's cart answers. A pure function of the call floor.
    Sector,
    /// Cart with the fewest queued destinations (hall + car entries).
    LeastBusy,
}

impl SimpleKind {
    pub fn name(self) -> &'static str {
        match self {
            SimpleKind::Random => "random",
            SimpleKind::First => "first",
            SimpleKind::Closest => "closest",
            SimpleKind::Sector => "sector",
            SimpleKind::LeastBusy => "least_busy",
        }
    }
}

/// Simulated route of one cart: every future stop and the infra-step (from
/// now) at which it begins, optionally with a hall call inserted.
///
/// The rollout replays the exact engine rules (sweep order, analytic motion,
/// step quantization, dwell per stop) over a copy of the cart's queue, so a
/// predicted stop time equals the stepped simulation's to the infra-step.
/// Group sizes behind future hall stops are unknown to the controller, so
/// their dwell is estimated at the bare door cycle.
pub fn predicted_route(
    world: &World,
    elevator: ElevatorId,
    insert: Option<(usize, Direction)>,
) -> Vec<(usize, u64)> {
    route_stops(world.config(), world, &world.elevators()[elevator], insert)
}

fn route_stops(
    cfg: &BuildingConfig,
    world: &World,
    cart: &Elevator,
    insert: Option<(usize, Direction)>,
) -> Vec<(usize, u64)> {
    let mut queue: DestinationQueue = cart.queue.clone();
    if let Some((floor, dir)) = insert {
        queue.insert_hall(floor, dir);
    }

    // Alighting headcount per landing, for dwell estimates.
    let mut alight_counts: Vec<usize> = vec![0; cfg.num_landings];
    for &pid in &cart.onboard {
        alight_counts[world.passengers()[pid].destination] += 1;
    }

    let mut stops: Vec<(usize, u64)> = Vec::new();
    let mut t: u64 = 0;
    let mut pos = cart.position_m;
    let mut committed = cart.committed;

    match cart.phase {
        Phase::Idle => {}
        Phase::Doors => {
            t += cart.dwell_remaining_steps();
        }
        Phase::Accelerating | Phase::Cruising | Phase::Decelerating => {
            let traj = cart.trajectory.as_ref().expect("moving cart has a trajectory");
            // Mirror the engine's mid-flight diversion rule for the
            // inserted call.
            let mut diverted = false;
            if let Some((floor, _)) = insert {
                let fpos = cfg.landing_position(floor);
                let sign = traj.direction_sign();
                let ahead = (fpos - cart.position_m) * sign > POS_EPS;
                let nearer = (traj.target_pos() - fpos) * sign > POS_EPS;
                let reachable = brake_distance(cart.velocity_mps.abs(), cfg.acceleration)
                    <= (fpos - cart.position_m).abs() + POS_EPS;
                if ahead && nearer && reachable {
                    let profile = MotionProfile::plan(
                        cart.position_m,
                        cart.velocity_mps,
                        fpos,
                        cfg.max_speed,
                        cfg.acceleration,
                    );
                    t += steps_ceil(profile.duration());
                    pos = fpos;
                    diverted = true;
                }
            }
            if !diverted {
                let remaining =
                    steps_ceil(traj.duration()).saturating_sub(cart.trajectory_steps);
                t += remaining;
                pos = traj.target_pos();
            }
            committed = Some(if traj.direction_sign() > 0.0 {
                Direction::Up
            } else {
                Direction::Down
            });
        }
    }

    loop {
        match select_next(&queue, pos, committed, cfg.floor_height) {
            NextMove::Idle => break,
            NextMove::StopHere(landing) => {
                stops.push((landing, t));
                queue.clear(landing, true, true, true);
                let persons = alight_counts[landing];
                alight_counts[landing] = 0;
                let dwell_s = cfg.door_cycle_s + persons as f64 * cfg.board_time_s;
                t += steps_ceil(dwell_s).max(1);
            }
            NextMove::Travel(landing, dir) => {
                let target = cfg.landing_position(landing);
                let profile =
                    MotionProfile::plan(pos, 0.0, target, cfg.max_speed, cfg.acceleration);
                t += steps_ceil(profile.duration());
                pos = target;
                committed = Some(dir);
            }
        }
    }
    stops
}

fn first_stop_at(stops: &[(usize, u64)], landing: usize) -> Option<u64> {
    stops.iter().find(|&&(f, _)| f == landing).map(|&(_, t)| t)
}

/// ETD cost of sending `elevator` to `call`: seconds until the cart would
/// complete service at the call landing, plus the summed delay the insertion
/// inflicts on every passenger the cart currently serves.
pub fn etd_cost(world: &World, elevator: ElevatorId, call: &HallCall) -> f64 {
    let cfg = world.config();
    let cart = &world.elevators()[elevator];
    let with = route_stops(cfg, world, cart, Some((call.floor, call.direction)));
    let without = route_stops(cfg, world, cart, None);

    let reach_steps =
        first_stop_at(&with, call.floor).expect("inserted call landing is always reached");
    let etd = reach_steps as f64 * INFRA_STEP_S + cfg.door_cycle_s;

    let mut delay = 0.0;
    // Riders: time to their destination landing. A rider whose alight is
    // already in progress (doors open at their landing) has no future stop
    // on the route and cannot be delayed.
    for &pid in &cart.onboard {
        let dest = world.passengers()[pid].destination;
        let before = first_stop_at(&without, dest);
        let after = first_stop_at(&with, dest);
        if let (Some(before), Some(after)) = (before, after) {
            delay += after.saturating_sub(before) as f64 * INFRA_STEP_S;
        }
    }
    // Waiting passengers already assigned to this cart: time to their pickup.
    for other in world.calls() {
        if other.id == call.id
            || other.status != CallStatus::Assigned
            || !other.assigned_elevators.contains(&elevator)
        {
            continue;
        }
        let before = first_stop_at(&without, other.floor);
        let after = first_stop_at(&with, other.floor);
        if let (Some(before), Some(after)) = (before, after) {
            delay +=
                other.remaining.len() as f64 * after.saturating_sub(before) as f64 * INFRA_STEP_S;
        }
    }
    etd + delay
}

/// Send the cart with the lowest ETD cost; ties go to the lowest id.
pub fn etd_dispatch(world: &World, call: &HallCall) -> DispatchDecision {
    let best = (0..world.config().num_elevators)
        .map(|e| (e, etd_cost(world, e, call)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(e, _)| e)
        .expect("at least one elevator");
    DispatchDecision {
        call: call.id,
        elevators: vec![best],
    }
}

/// Zone owner for the sector agent.
pub fn sector_zone(floor: usize, num_landings: usize, num_elevators: usize) -> usize {
    (floor * num_elevators / num_landings).min(num_elevators - 1)
}

/// One of the five simple baselines.
pub fn simple_dispatch(
    kind: SimpleKind,
    world: &World,
    call: &HallCall,
    rng: &mut ChaCha8Rng,
) -> DispatchDecision {
    let cfg = world.config();
    let chosen = match kind {
        SimpleKind::Random => rng.random_range(0..cfg.num_elevators),
        SimpleKind::First => 0,
        SimpleKind::Closest => {
            let call_pos = cfg.landing_position(call.floor);
            (0..cfg.num_elevators)
                .min_by(|&a, &b| {
                    let da = (world.elevators()[a].position_m - call_pos).abs();
                    let db = (world.elevators()[b].position_m - call_pos).abs();
                    da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                })
                .unwrap()
        }
        SimpleKind::Sector => sector_zone(call.floor, cfg.num_landings, cfg.num_elevators),
        SimpleKind::LeastBusy => (0..cfg.num_elevators)
            .min_by_key(|&e| (world.elevators()[e].queue.entry_count(), e))
            .unwrap(),
    };
    DispatchDecision {
        call: call.id,
        elevators: vec![chosen],
    }
}

/// Policy wrapper for the ETD baseline.
#[derive(Debug, Default)]
pub struct EtdPolicy;

impl Policy for EtdPolicy {
    fn decide(&mut self, world: &World, call: CallId) -> Vec<ElevatorId> {
        etd_dispatch(world, world.call(call)).elevators
    }
}

/// Policy wrapper for the simple baselines.
#[derive(Debug)]
pub struct SimplePolicy {
    kind: SimpleKind,
    rng: ChaCha8Rng,
}

impl SimplePolicy {
    pub fn new(kind: SimpleKind, seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for SimplePolicy {
    fn decide(&mut self, world: &World, call: CallId) -> Vec<ElevatorId> {
        simple_dispatch(self.kind, world, world.call(call), &mut self.rng).elevators
    }
}
