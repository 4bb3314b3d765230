//! Destination queues and sweep-order target selection.
//!
//! A cart serves its queue in the committed direction until no stop remains
//! ahead, then reverses. The same selection rules drive both the live engine
//! and the ETD cost rollout, so cost estimates and actual motion agree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Travel/call direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    /// Direction of a trip from `origin` to `destination` (landings differ).
    pub fn of_trip(origin: usize, destination: usize) -> Self {
        if destination > origin {
            Direction::Up
        } else {
            Direction::Down
        }
    }
}

/// Why a landing is queued. A landing can hold several reasons at once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StopFlags {
    pub car: bool,
    pub hall_up: bool,
    pub hall_down: bool,
}

impl StopFlags {
    pub fn is_empty(&self) -> bool {
        !(self.car || self.hall_up || self.hall_down)
    }

    pub fn hall(&self, dir: Direction) -> bool {
        match dir {
            Direction::Up => self.hall_up,
            Direction::Down => self.hall_down,
        }
    }

    pub fn set_hall(&mut self, dir: Direction, value: bool) {
        match dir {
            Direction::Up => self.hall_up = value,
            Direction::Down => self.hall_down = value,
        }
    }

    fn count(&self) -> usize {
        self.car as usize + self.hall_up as usize + self.hall_down as usize
    }
}

/// Ordered set of landings a cart has committed to stop at.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DestinationQueue {
    stops: BTreeMap<usize, StopFlags>,
}

impl DestinationQueue {
    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    /// Number of queued destinations, counting each reason separately
    /// (hall calls + car calls).
    pub fn entry_count(&self) -> usize {
        self.stops.values().map(StopFlags::count).sum()
    }

    pub fn flags(&self, landing: usize) -> StopFlags {
        self.stops.get(&landing).copied().unwrap_or_default()
    }

    pub fn contains(&self, landing: usize) -> bool {
        self.stops.contains_key(&landing)
    }

    pub fn insert_car(&mut self, landing: usize) {
        self.stops.entry(landing).or_default().car = true;
    }

    pub fn insert_hall(&mut self, landing: usize, dir: Direction) {
        self.stops.entry(landing).or_default().set_hall(dir, true);
    }

    /// Remove the given reasons from a landing, dropping the entry when no
    /// reason remains. Returns the flags that were present.
    pub fn clear(&mut self, landing: usize, car: bool, hall_up: bool, hall_down: bool) -> StopFlags {
        let Some(flags) = self.stops.get_mut(&landing) else {
            return StopFlags::default();
        };
        let before = *flags;
        if car {
            flags.car = false;
        }
        if hall_up {
            flags.hall_up = false;
        }
        if hall_down {
            flags.hall_down = false;
        }
        if flags.is_empty() {
            self.stops.remove(&landing);
        }
        before
    }

    pub fn landings(&self) -> impl Iterator<Item = usize> + '_ {
        self.stops.keys().copied()
    }

    /// Nearest queued landing strictly above / below the given position.
    fn next_in(&self, pos_m: f64, dir: Direction, floor_height: f64) -> Option<usize> {
        match dir {
            Direction::Up => self
                .stops
                .keys()
                .copied()
                .find(|&f| f as f64 * floor_height > pos_m + POS_EPS),
            Direction::Down => self
                .stops
                .keys()
                .rev()
                .copied()
                .find(|&f| (f as f64) * floor_height < pos_m - POS_EPS),
        }
    }

    /// Queued landing at the given position, if any.
    fn at(&self, pos_m: f64, floor_height: f64) -> Option<usize> {
        self.stops
            .keys()
            .copied()
            .find(|&f| (f as f64 * floor_height - pos_m).abs() <= POS_EPS)
    }
}

/// Position tolerance in meters when matching a cart to a landing.
pub const POS_EPS: f64 = 1e-6;

/// Outcome of sweep-order target selection for a cart at rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextMove {
    /// Queue empty: park here.
    Idle,
    /// A queued landing is at the current position: serve it now.
    StopHere(usize),
    /// Travel to a landing, committing to the given direction.
    Travel(usize, Direction),
}

/// Select the next stop for a cart at rest at `pos_m`.
///
/// Keeps the committed direction while any stop remains ahead of it,
/// otherwise reverses; an idle cart heads for its nearest stop.
pub fn select_next(
    queue: &DestinationQueue,
    pos_m: f64,
    committed: Option<Direction>,
    floor_height: f64,
) -> NextMove {
    if queue.is_empty() {
        return NextMove::Idle;
    }
    if let Some(here) = queue.at(pos_m, floor_height) {
        return NextMove::StopHere(here);
    }
    let first_try = committed.unwrap_or_else(|| {
        // Idle cart: head towards the nearest stop.
        let nearest = queue
            .landings()
            .min_by(|&a, &b| {
                let da = (a as f64 * floor_height - pos_m).abs();
                let db = (b as f64 * floor_height - pos_m).abs();
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .expect("non-empty queue");
        if nearest as f64 * floor_height > pos_m {
            Direction::Up
        } else {
            Direction::Down
        }
    });
    if let Some(target) = queue.next_in(pos_m, first_try, floor_height) {
        return NextMove::Travel(target, first_try);
    }
    let reversed = first_try.opposite();
    let target = queue
        .next_in(pos_m, reversed, floor_height)
        .expect("non-empty queue has a stop on one side");
    NextMove::Travel(target, reversed)
}
