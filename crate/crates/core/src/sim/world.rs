//! The discrete-event engine: the world advances in 0.1 s infra-steps, carts
//! follow analytic motion profiles and sweep order, rewards are emitted per
//! infra-step, and the run pauses for an agent decision exactly when a hall
//! call registers.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::config::{BuildingConfig, ConfigError, INFRA_STEP_S};
use crate::traffic::{TraceMeta, TrafficTrace};

use super::call::{CallId, CallStatus, HallCall};
use super::elevator::{DoorEvent, DwellState, Elevator, ElevatorId, Phase};
use super::events::{EventLog, EventRecord};
use super::kinematics::{brake_distance, MotionProfile};
use super::ledger::{
    RewardComponent, RewardLedger, REWARD_ARRIVAL, REWARD_ELEVATOR_FULL, REWARD_LOADING,
    REWARD_MOVING, REWARD_WAIT, REWARD_ZERO_ELEVATORS,
};
use super::passenger::{JourneyState, Passenger, PassengerId};
use super::sweep::{select_next, Direction, NextMove, POS_EPS};

/// Seconds before a call left with no incoming cart re-prompts the agent.
pub const REPROMPT_DELAY_S: f64 = 30.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trace endpoint out of range: {0}")]
    InvalidTrace(String),
    #[error("unknown elevator id {0}")]
    UnknownElevator(usize),
    #[error("subset size {got} exceeds the configured maximum {max}")]
    OversizeSubset { got: usize, max: usize },
    #[error("empty dispatch subsets are not allowed for this agent")]
    EmptySubsetNotAllowed,
    #[error("call {0} is not the pending decision")]
    NotPending(CallId),
    #[error("a decision is pending; apply it before advancing")]
    DecisionPending,
}

/// Knobs that depend on the agent driving the world.
#[derive(Debug, Clone)]
pub struct WorldOptions {
    /// Largest dispatch subset the agent may send (1-3).
    pub max_subset: usize,
    /// Whether a zero-elevator dispatch is a legal action.
    pub empty_dispatch_allowed: bool,
    /// Skip ahead over provably empty stretches (identical outcomes, fewer
    /// iterations). Disabled only by tests that cross-check the fast path.
    pub fast_forward: bool,
}

impl Default for WorldOptions {
    fn default() -> Self {
        Self {
            max_subset: 3,
            empty_dispatch_allowed: false,
            fast_forward: true,
        }
    }
}

/// Per-component rewards emitted during one infra-step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepRewards {
    by: [f64; 7],
}

impl StepRewards {
    pub fn add(&mut self, component: RewardComponent, value: f64) {
        self.by[component as usize] += value;
    }

    pub fn get(&self, component: RewardComponent) -> f64 {
        self.by[component as usize]
    }

    pub fn total(&self) -> f64 {
        self.by.iter().sum()
    }

    fn is_zero(&self) -> bool {
        self.by.iter().all(|&v| v == 0.0)
    }
}

/// Result of advancing the world by one infra-step.
#[derive(Debug, Clone)]
pub struct InfraStepOutcome {
    pub rewards: StepRewards,
    /// First hall call registered during this step, if any.
    pub new_hall_call: Option<CallId>,
}

/// Where a run pauses: either a call awaits a decision or the episode ended.
#[derive(Debug, Clone)]
pub struct DecisionPoint {
    /// Pending call; `None` on the terminal point.
    pub call: Option<CallId>,
    /// Total reward per infra-step since the previous decision, oldest first.
    pub rewards: Vec<f64>,
    pub terminal: bool,
}

impl DecisionPoint {
    /// Number of infra-steps spanned by this decision gap.
    pub fn n_infra(&self) -> usize {
        self.rewards.len()
    }
}

#[derive(Debug, Clone)]
struct PreparedArrival {
    step: u64,
    origin: usize,
    destination: usize,
    weights: Vec<f64>,
}

/// Full simulation state for one environment run.
#[derive(Debug)]
pub struct World {
    cfg: BuildingConfig,
    opts: WorldOptions,
    meta: TraceMeta,
    clock_steps: u64,
    elevators: Vec<Elevator>,
    passengers: Vec<Passenger>,
    calls: Vec<HallCall>,
    arrivals: Vec<PreparedArrival>,
    arrival_cursor: usize,
    pending_decisions: VecDeque<CallId>,
    pending_decision: Option<CallId>,
    reprompts: BTreeMap<u64, Vec<CallId>>,
    ledger: RewardLedger,
    /// Rewards emitted at dispatch time, folded into the next infra-step.
    pending_instant: StepRewards,
    waiting_count: usize,
    riding_count: usize,
    delivered_count: usize,
    event_log: Option<EventLog>,
}

/// Mutable context threaded through cart updates within one step.
struct StepCtx<'a> {
    cfg: &'a BuildingConfig,
    now_s: f64,
    passengers: &'a mut Vec<Passenger>,
    calls: &'a mut Vec<HallCall>,
    ledger: &'a mut RewardLedger,
    rewards: &'a mut StepRewards,
    waiting_count: &'a mut usize,
    riding_count: &'a mut usize,
    delivered_count: &'a mut usize,
    reprompts: &'a mut BTreeMap<u64, Vec<CallId>>,
    clock_steps: u64,
    event_log: Option<&'a mut EventLog>,
}

impl StepCtx<'_> {
    fn emit(&mut self, component: RewardComponent, value: f64) {
        self.ledger.add(component, value);
        self.rewards.add(component, value);
    }

    fn log(
        &mut self,
        kind: &str,
        elevator: Option<usize>,
        floor: Option<usize>,
        passenger: Option<usize>,
        reward: Option<(RewardComponent, f64)>,
    ) {
        if let Some(log) = self.event_log.as_deref_mut() {
            log.record(&EventRecord {
                t_s: self.now_s,
                kind,
                elevator,
                floor,
                passenger,
                reward_component: reward.map(|(c, _)| c.name()),
                value: reward.map(|(_, v)| v),
            });
        }
    }
}

/// First infra-step boundary at or after `seconds` on the step grid.
pub fn steps_ceil(seconds: f64) -> u64 {
    let raw = (seconds / INFRA_STEP_S - 1e-9).ceil();
    if raw <= 0.0 {
        0
    } else {
        raw as u64
    }
}

impl World {
    pub fn new(
        cfg: BuildingConfig,
        trace: &TrafficTrace,
        opts: WorldOptions,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        if !(1..=3).contains(&opts.max_subset) {
            return Err(SimError::OversizeSubset {
                got: opts.max_subset,
                max: 3,
            });
        }
        let mut arrivals = Vec::with_capacity(trace.groups.len());
        for group in &trace.groups {
            if group.origin >= cfg.num_landings || group.destination >= cfg.num_landings {
                return Err(SimError::InvalidTrace(format!(
                    "group at t={} uses landing beyond {}",
                    group.t_s,
                    cfg.num_landings - 1
                )));
            }
            if group.origin == group.destination || group.weights.is_empty() {
                return Err(SimError::InvalidTrace(format!(
                    "degenerate group at t={}",
                    group.t_s
                )));
            }
            arrivals.push(PreparedArrival {
                step: steps_ceil(group.t_s).max(1),
                origin: group.origin,
                destination: group.destination,
                weights: group.weights.clone(),
            });
        }
        let elevators = (0..cfg.num_elevators)
            .map(|id| Elevator::parked_at(id, 0, cfg.floor_height))
            .collect();
        Ok(Self {
            cfg,
            opts,
            meta: trace.meta.clone(),
            clock_steps: 0,
            elevators,
            passengers: Vec::new(),
            calls: Vec::new(),
            arrivals,
            arrival_cursor: 0,
            pending_decisions: VecDeque::new(),
            pending_decision: None,
            reprompts: BTreeMap::new(),
            ledger: RewardLedger::default(),
            pending_instant: StepRewards::default(),
            waiting_count: 0,
            riding_count: 0,
            delivered_count: 0,
            event_log: None,
        })
    }

    pub fn attach_event_log(&mut self, log: EventLog) {
        self.event_log = Some(log);
    }

    pub fn flush_event_log(&mut self) -> std::io::Result<()> {
        match self.event_log.as_mut() {
            Some(log) => log.flush(),
            None => Ok(()),
        }
    }

    pub fn config(&self) -> &BuildingConfig {
        &self.cfg
    }

    pub fn options(&self) -> &WorldOptions {
        &self.opts
    }

    pub fn clock_s(&self) -> f64 {
        self.clock_steps as f64 * INFRA_STEP_S
    }

    pub fn clock_steps(&self) -> u64 {
        self.clock_steps
    }

    pub fn day_of_week(&self) -> u8 {
        self.meta.day
    }

    pub fn ledger(&self) -> &RewardLedger {
        &self.ledger
    }

    pub fn elevators(&self) -> &[Elevator] {
        &self.elevators
    }

    pub fn passengers(&self) -> &[Passenger] {
        &self.passengers
    }

    pub fn calls(&self) -> &[HallCall] {
        &self.calls
    }

    pub fn call(&self, id: CallId) -> &HallCall {
        &self.calls[id]
    }

    pub fn pending_call(&self) -> Option<CallId> {
        self.pending_decision
    }

    pub fn waiting_count(&self) -> usize {
        self.waiting_count
    }

    pub fn riding_count(&self) -> usize {
        self.riding_count
    }

    pub fn delivered_count(&self) -> usize {
        self.delivered_count
    }

    pub fn created_count(&self) -> usize {
        self.passengers.len()
    }

    /// Trace exhausted and every created passenger delivered.
    pub fn is_terminal(&self) -> bool {
        self.arrival_cursor >= self.arrivals.len()
            && self.waiting_count == 0
            && self.riding_count == 0
    }

    /// Advance the world by exactly one infra-step.
    pub fn advance_infra_step(&mut self) -> InfraStepOutcome {
        self.clock_steps += 1;
        let mut rewards = std::mem::take(&mut self.pending_instant);
        let now_s = self.clock_s();

        // Cart movement, dwell progress, boarding and alighting.
        let mut moving = 0usize;
        {
            let mut ctx = StepCtx {
                cfg: &self.cfg,
                now_s,
                passengers: &mut self.passengers,
                calls: &mut self.calls,
                ledger: &mut self.ledger,
                rewards: &mut rewards,
                waiting_count: &mut self.waiting_count,
                riding_count: &mut self.riding_count,
                delivered_count: &mut self.delivered_count,
                reprompts: &mut self.reprompts,
                clock_steps: self.clock_steps,
                event_log: self.event_log.as_mut(),
            };
            for cart in self.elevators.iter_mut() {
                if tick_cart(cart, &mut ctx) {
                    moving += 1;
                }
            }
        }

        // Per-infra-step penalties on passengers already in the system and
        // carts that moved this step.
        if moving > 0 {
            let v = moving as f64 * REWARD_MOVING;
            self.ledger.add(RewardComponent::Moving, v);
            rewards.add(RewardComponent::Moving, v);
        }
        if self.waiting_count > 0 {
            let v = self.waiting_count as f64 * REWARD_WAIT;
            self.ledger.add(RewardComponent::WaitFloor, v);
            rewards.add(RewardComponent::WaitFloor, v);
        }
        if self.riding_count > 0 {
            let v = self.riding_count as f64 * REWARD_WAIT;
            self.ledger.add(RewardComponent::WaitElev, v);
            rewards.add(RewardComponent::WaitElev, v);
        }

        // Arrivals whose timestamp falls inside this step register now.
        let mut new_call = None;
        while self.arrival_cursor < self.arrivals.len()
            && self.arrivals[self.arrival_cursor].step <= self.clock_steps
        {
            let id = self.register_arrival(self.arrival_cursor);
            new_call.get_or_insert(id);
            self.arrival_cursor += 1;
        }

        // Calls whose re-prompt deadline elapsed return to the agent.
        if let Some(ids) = self.reprompts.remove(&self.clock_steps) {
            for id in ids {
                let call = &mut self.calls[id];
                if call.status == CallStatus::AwaitingReprompt && !call.remaining.is_empty() {
                    call.status = CallStatus::PendingDecision;
                    call.reprompt_deadline_s = None;
                    self.pending_decisions.push_back(id);
                    if let Some(log) = self.event_log.as_mut() {
                        log.record(&EventRecord {
                            t_s: now_s,
                            kind: "reprompt",
                            elevator: None,
                            floor: Some(call.floor),
                            passenger: None,
                            reward_component: None,
                            value: None,
                        });
                    }
                }
            }
        }

        InfraStepOutcome {
            rewards,
            new_hall_call: new_call,
        }
    }

    /// Advance until a call awaits a decision or the episode ends.
    pub fn run_until_next_decision(&mut self) -> Result<DecisionPoint, SimError> {
        if self.pending_decision.is_some() {
            return Err(SimError::DecisionPending);
        }
        let mut rewards = Vec::new();
        if self.is_terminal() && self.pending_decisions.is_empty() {
            return Ok(DecisionPoint {
                call: None,
                rewards,
                terminal: true,
            });
        }
        loop {
            if self.opts.fast_forward {
                self.fast_forward_idle_gap(&mut rewards);
            }
            let outcome = self.advance_infra_step();
            rewards.push(outcome.rewards.total());
            if let Some(id) = self.pending_decisions.pop_front() {
                self.pending_decision = Some(id);
                return Ok(DecisionPoint {
                    call: Some(id),
                    rewards,
                    terminal: false,
                });
            }
            if self.is_terminal() {
                return Ok(DecisionPoint {
                    call: None,
                    rewards,
                    terminal: true,
                });
            }
        }
    }

    /// Jump over steps where provably nothing happens: all carts idle, nobody
    /// in the system, no pending rewards or deadlines, next arrival far away.
    /// Each skipped step contributes exactly zero reward.
    fn fast_forward_idle_gap(&mut self, rewards: &mut Vec<f64>) {
        if self.waiting_count != 0
            || self.riding_count != 0
            || !self.pending_instant.is_zero()
            || !self.reprompts.is_empty()
            || !self.pending_decisions.is_empty()
            || self.arrival_cursor >= self.arrivals.len()
        {
            return;
        }
        if !self
            .elevators
            .iter()
            .all(|e| e.phase == Phase::Idle && e.queue.is_empty())
        {
            return;
        }
        let next_step = self.arrivals[self.arrival_cursor].step;
        if next_step <= self.clock_steps + 1 {
            return;
        }
        let skip = next_step - self.clock_steps - 1;
        self.clock_steps += skip;
        rewards.extend(std::iter::repeat(0.0).take(skip as usize));
    }

    /// Apply the agent's decision for the pending call.
    pub fn apply_dispatch(&mut self, call_id: CallId, subset: &[ElevatorId]) -> Result<(), SimError> {
        if self.pending_decision != Some(call_id) {
            return Err(SimError::NotPending(call_id));
        }
        let chosen: BTreeSet<ElevatorId> = subset.iter().copied().collect();
        for &e in &chosen {
            if e >= self.cfg.num_elevators {
                return Err(SimError::UnknownElevator(e));
            }
        }
        if chosen.len() > self.opts.max_subset {
            return Err(SimError::OversizeSubset {
                got: chosen.len(),
                max: self.opts.max_subset,
            });
        }
        if chosen.is_empty() && !self.opts.empty_dispatch_allowed {
            return Err(SimError::EmptySubsetNotAllowed);
        }
        self.pending_decision = None;
        let now_s = self.clock_s();

        let mut instant = std::mem::take(&mut self.pending_instant);
        {
            let mut ctx = StepCtx {
                cfg: &self.cfg,
                now_s,
                passengers: &mut self.passengers,
                calls: &mut self.calls,
                ledger: &mut self.ledger,
                rewards: &mut instant,
                waiting_count: &mut self.waiting_count,
                riding_count: &mut self.riding_count,
                delivered_count: &mut self.delivered_count,
                reprompts: &mut self.reprompts,
                clock_steps: self.clock_steps,
                event_log: self.event_log.as_mut(),
            };

            if chosen.is_empty() {
                ctx.emit(RewardComponent::ZeroElevators, REWARD_ZERO_ELEVATORS);
                let deadline = ctx.clock_steps + steps_ceil(REPROMPT_DELAY_S);
                let call = &mut ctx.calls[call_id];
                call.status = CallStatus::AwaitingReprompt;
                call.reprompt_deadline_s = Some(deadline as f64 * INFRA_STEP_S);
                let floor = call.floor;
                ctx.reprompts.entry(deadline).or_default().push(call_id);
                ctx.log(
                    "zero_elevators",
                    None,
                    Some(floor),
                    None,
                    Some((RewardComponent::ZeroElevators, REWARD_ZERO_ELEVATORS)),
                );
            } else {
                let (floor, direction) = {
                    let call = &mut ctx.calls[call_id];
                    call.status = CallStatus::Assigned;
                    call.reprompt_deadline_s = None;
                    call.assigned_elevators.extend(chosen.iter().copied());
                    (call.floor, call.direction)
                };
                for &e in &chosen {
                    ctx.log("dispatch", Some(e), Some(floor), None, None);
                }
                for &e in &chosen {
                    assign_to_cart(&mut self.elevators[e], floor, direction, &mut ctx);
                }
            }
        }
        self.pending_instant = instant;
        Ok(())
    }

    fn register_arrival(&mut self, index: usize) -> CallId {
        let arrival = self.arrivals[index].clone();
        let call_id = self.calls.len();
        let now_s = self.clock_s();
        let mut members = Vec::with_capacity(arrival.weights.len());
        for &w in &arrival.weights {
            let pid = self.passengers.len();
            self.passengers.push(Passenger {
                id: pid,
                arrival_time_s: now_s,
                origin: arrival.origin,
                destination: arrival.destination,
                weight_kg: w,
                boarded_time_s: None,
                alighted_time_s: None,
                state: JourneyState::Waiting,
                call: call_id,
            });
            members.push(pid);
            self.waiting_count += 1;
        }
        let direction = Direction::of_trip(arrival.origin, arrival.destination);
        self.calls.push(HallCall {
            id: call_id,
            floor: arrival.origin,
            direction,
            registered_time_s: now_s,
            group: members.clone(),
            assigned_elevators: BTreeSet::new(),
            reprompt_deadline_s: None,
            status: CallStatus::PendingDecision,
            remaining: members,
        });
        self.pending_decisions.push_back(call_id);
        if let Some(log) = self.event_log.as_mut() {
            log.record(&EventRecord {
                t_s: now_s,
                kind: "hall_call",
                elevator: None,
                floor: Some(arrival.origin),
                passenger: None,
                reward_component: None,
                value: Some(arrival.weights.len() as f64),
            });
        }
        call_id
    }
}

/// Advance one cart by one infra-step. Returns whether it moved.
fn tick_cart(cart: &mut Elevator, ctx: &mut StepCtx<'_>) -> bool {
    match cart.phase {
        Phase::Idle => false,
        Phase::Doors => {
            tick_dwell(cart, ctx);
            false
        }
        Phase::Accelerating | Phase::Cruising | Phase::Decelerating => {
            cart.trajectory_steps += 1;
            let traj = cart.trajectory.as_ref().expect("moving cart has a trajectory");
            let duration_steps = steps_ceil(traj.duration());
            if cart.trajectory_steps >= duration_steps {
                let target = traj.target_pos();
                cart.position_m = target;
                cart.velocity_mps = 0.0;
                cart.trajectory = None;
                cart.trajectory_steps = 0;
                let landing =
                    (target / ctx.cfg.floor_height).round() as usize;
                begin_stop(cart, landing, ctx);
            } else {
                let tau = cart.trajectory_steps as f64 * INFRA_STEP_S;
                let (pos, vel) = traj.eval(tau);
                cart.position_m = pos;
                cart.velocity_mps = vel.clamp(-ctx.cfg.max_speed, ctx.cfg.max_speed);
                cart.phase = Elevator::motion_phase(traj, tau);
            }
            true
        }
    }
}

fn tick_dwell(cart: &mut Elevator, ctx: &mut StepCtx<'_>) {
    let mut dwell = cart.dwell.take().expect("doors phase has a dwell");
    dwell.elapsed_steps += 1;
    let floor = dwell.floor;
    while let Some(&(offset, event)) = dwell.events.front() {
        if offset > dwell.elapsed_steps {
            break;
        }
        dwell.events.pop_front();
        match event {
            DoorEvent::Alight(pid) => {
                let p = &mut ctx.passengers[pid];
                p.state = JourneyState::Done;
                p.alighted_time_s = Some(ctx.now_s);
                let w = p.weight_kg;
                cart.onboard.retain(|&q| q != pid);
                cart.load_kg -= w;
                *ctx.riding_count -= 1;
                *ctx.delivered_count += 1;
                ctx.emit(RewardComponent::Arrival, REWARD_ARRIVAL);
                ctx.log(
                    "alight",
                    Some(cart.id),
                    Some(floor),
                    Some(pid),
                    Some((RewardComponent::Arrival, REWARD_ARRIVAL)),
                );
            }
            DoorEvent::Board(pid) => {
                let p = &mut ctx.passengers[pid];
                p.state = JourneyState::Riding;
                p.boarded_time_s = Some(ctx.now_s);
                let w = p.weight_kg;
                cart.onboard.push(pid);
                cart.load_kg += w;
                *ctx.waiting_count -= 1;
                *ctx.riding_count += 1;
                ctx.emit(RewardComponent::Loading, REWARD_LOADING);
                ctx.log(
                    "board",
                    Some(cart.id),
                    Some(floor),
                    Some(pid),
                    Some((RewardComponent::Loading, REWARD_LOADING)),
                );
            }
        }
    }
    if dwell.elapsed_steps >= dwell.total_steps {
        settle_served_calls(cart, &dwell.served_calls, ctx);
        dispatch_next_move(cart, ctx);
    } else {
        cart.dwell = Some(dwell);
    }
}

/// Open the doors at a landing: commit the boarding/alighting manifest and
/// schedule the per-person door crossings.
fn begin_stop(cart: &mut Elevator, landing: usize, ctx: &mut StepCtx<'_>) {
    debug_assert!(
        (cart.position_m - ctx.cfg.landing_position(landing)).abs() <= POS_EPS,
        "stop begun away from the landing"
    );
    cart.phase = Phase::Doors;
    cart.velocity_mps = 0.0;
    let flags = cart.queue.clear(landing, true, true, true);

    // Passengers on board destined here leave, freeing capacity first.
    let alights: Vec<PassengerId> = cart
        .onboard
        .iter()
        .copied()
        .filter(|&pid| ctx.passengers[pid].destination == landing)
        .collect();
    let alight_weight: f64 = alights.iter().map(|&pid| ctx.passengers[pid].weight_kg).sum();

    // Waiting passengers in the served call directions, oldest call first.
    let mut served_dirs = Vec::new();
    if flags.hall_up {
        served_dirs.push(Direction::Up);
    }
    if flags.hall_down {
        served_dirs.push(Direction::Down);
    }
    let mut served_calls = Vec::new();
    let mut pool = Vec::new();
    for call in ctx.calls.iter() {
        if call.floor == landing
            && served_dirs.contains(&call.direction)
            && matches!(
                call.status,
                CallStatus::Assigned | CallStatus::AwaitingReprompt
            )
        {
            served_calls.push(call.id);
            pool.extend(call.remaining.iter().copied());
        }
    }

    // Board in arrival order while the payload fits; people do not squeeze
    // past a blocked passenger.
    let mut load = cart.load_kg - alight_weight;
    let mut boarders = Vec::new();
    for &pid in &pool {
        let w = ctx.passengers[pid].weight_kg;
        if load + w <= ctx.cfg.capacity_kg {
            boarders.push(pid);
            load += w;
        } else {
            break;
        }
    }
    if !pool.is_empty() && boarders.is_empty() {
        ctx.emit(RewardComponent::ElevatorFull, REWARD_ELEVATOR_FULL);
        ctx.log(
            "elevator_full",
            Some(cart.id),
            Some(landing),
            None,
            Some((RewardComponent::ElevatorFull, REWARD_ELEVATOR_FULL)),
        );
    }
    for &pid in &boarders {
        let p = &mut ctx.passengers[pid];
        p.state = JourneyState::Reserved;
        let destination = p.destination;
        let call_id = p.call;
        let call = &mut ctx.calls[call_id];
        call.remaining.retain(|&q| q != pid);
        // The destination is committed as soon as boarding is: route
        // estimates made during the dwell already see the car call.
        cart.queue.insert_car(destination);
    }

    // Door cycle plus one crossing per person, quantized to whole steps.
    let open_s = ctx.cfg.door_cycle_s / 2.0;
    let mut events = VecDeque::with_capacity(alights.len() + boarders.len());
    for (i, &pid) in alights.iter().enumerate() {
        let t = open_s + (i + 1) as f64 * ctx.cfg.board_time_s;
        events.push_back((steps_ceil(t), DoorEvent::Alight(pid)));
    }
    for (j, &pid) in boarders.iter().enumerate() {
        let t = open_s + (alights.len() + j + 1) as f64 * ctx.cfg.board_time_s;
        events.push_back((steps_ceil(t), DoorEvent::Board(pid)));
    }
    let total_s =
        ctx.cfg.door_cycle_s + (alights.len() + boarders.len()) as f64 * ctx.cfg.board_time_s;
    cart.dwell = Some(DwellState {
        floor: landing,
        total_steps: steps_ceil(total_s).max(1),
        elapsed_steps: 0,
        events,
        served_calls,
    });
    ctx.log("stop", Some(cart.id), Some(landing), None, None);
}

/// Settle the calls a stop serviced once its doors close.
fn settle_served_calls(cart: &Elevator, served: &[CallId], ctx: &mut StepCtx<'_>) {
    for &call_id in served {
        let call = &mut ctx.calls[call_id];
        match call.status {
            CallStatus::Resolved | CallStatus::PendingDecision => {}
            CallStatus::Assigned | CallStatus::AwaitingReprompt => {
                call.assigned_elevators.remove(&cart.id);
                if call.remaining.is_empty() {
                    call.status = CallStatus::Resolved;
                    call.reprompt_deadline_s = None;
                } else if call.assigned_elevators.is_empty()
                    && call.status == CallStatus::Assigned
                {
                    // Nobody is coming for the leftovers; put the call back
                    // in front of the agent after the re-prompt delay.
                    call.status = CallStatus::AwaitingReprompt;
                    let deadline = ctx.clock_steps + steps_ceil(REPROMPT_DELAY_S);
                    call.reprompt_deadline_s = Some(deadline as f64 * INFRA_STEP_S);
                    ctx.reprompts.entry(deadline).or_default().push(call_id);
                }
            }
        }
    }
}

/// Run sweep-order selection for a cart at rest and act on it.
fn dispatch_next_move(cart: &mut Elevator, ctx: &mut StepCtx<'_>) {
    match select_next(
        &cart.queue,
        cart.position_m,
        cart.committed,
        ctx.cfg.floor_height,
    ) {
        NextMove::Idle => {
            cart.phase = Phase::Idle;
            cart.committed = None;
        }
        NextMove::StopHere(landing) => begin_stop(cart, landing, ctx),
        NextMove::Travel(landing, dir) => {
            if let Some(prev) = cart.committed {
                if prev != dir {
                    debug_assert!(
                        !has_stop_ahead(cart, prev, ctx.cfg.floor_height),
                        "reversal with a same-direction stop ahead"
                    );
                }
            }
            let target = ctx.cfg.landing_position(landing);
            let profile =
                MotionProfile::plan(cart.position_m, 0.0, target, ctx.cfg.max_speed, ctx.cfg.acceleration);
            cart.phase = Elevator::motion_phase(&profile, 0.0);
            cart.trajectory = Some(profile);
            cart.trajectory_steps = 0;
            cart.committed = Some(dir);
        }
    }
}

fn has_stop_ahead(cart: &Elevator, dir: Direction, floor_height: f64) -> bool {
    cart.queue.landings().any(|f| {
        let fpos = f as f64 * floor_height;
        (fpos - cart.position_m) * dir.sign() > POS_EPS
    })
}

/// Route a newly assigned hall call into a cart's queue, kicking idle carts
/// into motion and diverting in-flight carts to a nearer reachable stop.
fn assign_to_cart(cart: &mut Elevator, floor: usize, dir: Direction, ctx: &mut StepCtx<'_>) {
    cart.queue.insert_hall(floor, dir);
    match cart.phase {
        Phase::Idle => dispatch_next_move(cart, ctx),
        Phase::Doors => {}
        Phase::Accelerating | Phase::Cruising | Phase::Decelerating => {
            let traj = cart.trajectory.as_ref().expect("moving cart has a trajectory");
            let fpos = ctx.cfg.landing_position(floor);
            let sign = traj.direction_sign();
            let ahead = (fpos - cart.position_m) * sign > POS_EPS;
            let nearer = (traj.target_pos() - fpos) * sign > POS_EPS;
            let reachable = brake_distance(cart.velocity_mps.abs(), ctx.cfg.acceleration)
                <= (fpos - cart.position_m).abs() + POS_EPS;
            if ahead && nearer && reachable {
                let profile = MotionProfile::plan(
                    cart.position_m,
                    cart.velocity_mps,
                    fpos,
                    ctx.cfg.max_speed,
                    ctx.cfg.acceleration,
                );
                cart.phase = Elevator::motion_phase(&profile, 0.0);
                cart.trajectory = Some(profile);
                cart.trajectory_steps = 0;
            }
        }
    }
}
