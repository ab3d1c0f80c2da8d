//! Microscopic vehicle mobility on a [`ManhattanGrid`].
//!
//! Vehicles keep a constant speed and their lane index. Approaching an
//! intersection a vehicle samples left/straight/right once, at the point
//! where its lane crosses the right-turn target lane. Right turns are taken
//! there, left turns further on where the lane crosses the left-turn target
//! lane, so positions always stay on a lane line. A manoeuvre that would
//! leave the grid becomes a U-turn onto the opposite lane of the same road.

use rand::Rng;

use super::manhattan::{Heading, ManhattanGrid};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PendingLeft {
    at: f64,
    intersection: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    position: (f64, f64),
    heading: Heading,
    speed: f64,
    road: usize,
    lane: usize,
    next: usize,
    pending: Option<PendingLeft>,
}

fn along(heading: Heading, p: (f64, f64)) -> f64 {
    if heading.is_horizontal() {
        p.0
    } else {
        p.1
    }
}

fn set_along(heading: Heading, p: &mut (f64, f64), v: f64) {
    if heading.is_horizontal() {
        p.0 = v;
    } else {
        p.1 = v;
    }
}

fn set_cross(heading: Heading, p: &mut (f64, f64), v: f64) {
    if heading.is_horizontal() {
        p.1 = v;
    } else {
        p.0 = v;
    }
}

fn decision_point(grid: &ManhattanGrid, heading: Heading, lane: usize, intersection: usize) -> f64 {
    grid.lane_coord(
        grid.cross_road_center(heading, intersection),
        heading.right(),
        lane,
    )
}

impl Vehicle {
    /// Vehicle on lane `lane` of road `road`, `along` metres along the
    /// travel axis. Fails if no intersection lies ahead.
    pub fn on_lane(
        grid: &ManhattanGrid,
        heading: Heading,
        road: usize,
        lane: usize,
        along_coord: f64,
        speed: f64,
    ) -> Result<Self> {
        let roads = grid.crossings(heading.left());
        if road >= roads || lane >= grid.spec().lanes_per_direction {
            return Err(invalid("Vehicle", format!("no lane {lane} on road {road}")));
        }
        let cross = grid.lane_coord(grid.road_center(heading, road), heading, lane);
        let mut position = (0.0, 0.0);
        set_along(heading, &mut position, along_coord);
        set_cross(heading, &mut position, cross);
        let n = grid.crossings(heading);
        let ahead = |k: usize| {
            (decision_point(grid, heading, lane, k) - along_coord) * heading.sign() > 0.0
        };
        let next = if heading.sign() > 0.0 {
            (0..n).find(|&k| ahead(k))
        } else {
            (0..n).rev().find(|&k| ahead(k))
        }
        .ok_or_else(|| invalid("Vehicle", "no intersection ahead on this lane"))?;
        Ok(Self {
            position,
            heading,
            speed,
            road,
            lane,
            next,
            pending: None,
        })
    }

    pub fn position(&self) -> (f64, f64) {
        self.position
    }
    pub fn heading(&self) -> Heading {
        self.heading
    }
    pub fn heading_unit(&self) -> (f64, f64) {
        self.heading.unit()
    }
    /// m/s
    pub fn speed(&self) -> f64 {
        self.speed
    }
    pub fn road(&self) -> usize {
        self.road
    }
    pub fn lane(&self) -> usize {
        self.lane
    }

    fn next_event(&self, grid: &ManhattanGrid) -> f64 {
        match self.pending {
            Some(p) => p.at,
            None => decision_point(grid, self.heading, self.lane, self.next),
        }
    }

    // Moves onto the perpendicular road `cross_road` with heading `to`.
    fn turn_onto(&mut self, grid: &ManhattanGrid, to: Heading, cross_road: usize) {
        let old_road = self.road;
        let coord = grid.lane_coord(grid.road_center(to, cross_road), to, self.lane);
        set_cross(to, &mut self.position, coord);
        self.heading = to;
        self.road = cross_road;
        self.next = if to.sign() > 0.0 {
            old_road + 1
        } else {
            old_road - 1
        };
        self.pending = None;
    }

    fn u_turn(&mut self, grid: &ManhattanGrid, at: usize) {
        let to = self.heading.reverse();
        let coord = grid.lane_coord(grid.road_center(to, self.road), to, self.lane);
        set_cross(to, &mut self.position, coord);
        self.heading = to;
        self.next = if to.sign() > 0.0 { at + 1 } else { at - 1 };
    }

    fn can_move(&self, grid: &ManhattanGrid, to: Heading, at: usize) -> bool {
        let (index, count) = if to.is_horizontal() == self.heading.is_horizontal() {
            (at, grid.crossings(to))
        } else {
            (self.road, grid.crossings(to))
        };
        if to.sign() > 0.0 {
            index + 1 < count
        } else {
            index > 0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MobilityState {
    pub vehicles: Vec<Vehicle>,
    /// Sampled decisions so far: `[left, straight, right]`.
    pub turn_counts: [u64; 3],
}

impl MobilityState {
    pub fn len(&self) -> usize {
        self.vehicles.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }
}

fn sample_turn<R: Rng + ?Sized>(grid: &ManhattanGrid, rng: &mut R) -> Turn {
    let t = grid.spec().turns;
    let u: f64 = rng.random();
    if u < t.left {
        Turn::Left
    } else if u < t.left + t.straight {
        Turn::Straight
    } else {
        Turn::Right
    }
}

/// Drops `count` vehicles uniformly over all lanes at the grid's speed.
pub fn place_vehicles<R: Rng + ?Sized>(
    grid: &ManhattanGrid,
    count: usize,
    rng: &mut R,
) -> MobilityState {
    let mut vehicles = Vec::with_capacity(count);
    let (width, height) = grid.extent();
    let lanes = grid.spec().lanes_per_direction;
    while vehicles.len() < count {
        let heading = Heading::ALL[rng.random_range(0..4)];
        let road = rng.random_range(0..grid.crossings(heading.left()));
        let lane = rng.random_range(0..lanes);
        let span = if heading.is_horizontal() {
            width
        } else {
            height
        };
        let pos = rng.random::<f64>() * span;
        if let Ok(v) = Vehicle::on_lane(grid, heading, road, lane, pos, grid.vehicle_speed_mps()) {
            vehicles.push(v);
        }
    }
    MobilityState {
        vehicles,
        turn_counts: [0; 3],
    }
}

/// Advances every vehicle by `speed·dt` along the lane graph.
pub fn step_mobility<R: Rng + ?Sized>(
    state: &mut MobilityState,
    grid: &ManhattanGrid,
    dt: f64,
    rng: &mut R,
) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    for v in &mut state.vehicles {
        let mut remaining = v.speed * dt;
        loop {
            let here = along(v.heading, v.position);
            let event = v.next_event(grid);
            let gap = ((event - here) * v.heading.sign()).max(0.0);
            if gap > remaining {
                set_along(
                    v.heading,
                    &mut v.position,
                    here + v.heading.sign() * remaining,
                );
                break;
            }
            remaining -= gap;
            set_along(v.heading, &mut v.position, event);
            if let Some(p) = v.pending {
                let to = v.heading.left();
                v.turn_onto(grid, to, p.intersection);
                continue;
            }
            let at = v.next;
            let turn = sample_turn(grid, rng);
            state.turn_counts[turn as usize] += 1;
            let target = match turn {
                Turn::Left => v.heading.left(),
                Turn::Straight => v.heading,
                Turn::Right => v.heading.right(),
            };
            if !v.can_move(grid, target, at) {
                v.u_turn(grid, at);
                continue;
            }
            match turn {
                Turn::Right => v.turn_onto(grid, target, at),
                Turn::Straight => {
                    v.next = if v.heading.sign() > 0.0 {
                        at + 1
                    } else {
                        at - 1
                    }
                }
                Turn::Left => {
                    v.pending = Some(PendingLeft {
                        at: grid.lane_coord(grid.cross_road_center(v.heading, at), target, v.lane),
                        intersection: at,
                    });
                }
            }
        }
    }
    Ok(())
}
