//! Manhattan-grid urban geometry.
//!
//! Roads run along the block boundaries: vertical roads at `x = i·W`
//! (`i = 0..=nx`) and horizontal roads at `y = j·H` (`j = 0..=ny`). Each
//! road carries `lanes_per_direction` lanes per direction with right-hand
//! traffic, then a sidewalk on both sides, then the building. The road
//! corridor half-width is therefore `lanes·lane_width + sidewalk_width`
//! and every building is the block pitch minus one full corridor.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heading {
    East,
    North,
    West,
    South,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::East, Heading::North, Heading::West, Heading::South];

    pub fn left(self) -> Heading {
        match self {
            Heading::East => Heading::North,
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
        }
    }

    pub fn right(self) -> Heading {
        self.left().reverse()
    }

    pub fn reverse(self) -> Heading {
        self.left().left()
    }

    pub fn unit(self) -> (f64, f64) {
        match self {
            Heading::East => (1.0, 0.0),
            Heading::North => (0.0, 1.0),
            Heading::West => (-1.0, 0.0),
            Heading::South => (0.0, -1.0),
        }
    }

    /// Travels along the x axis (on a horizontal road).
    pub fn is_horizontal(self) -> bool {
        matches!(self, Heading::East | Heading::West)
    }

    /// +1 when moving toward increasing coordinate along the travel axis.
    pub fn sign(self) -> f64 {
        match self {
            Heading::East | Heading::North => 1.0,
            Heading::West | Heading::South => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }
    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x0 && p.0 <= self.x1 && p.1 >= self.y0 && p.1 <= self.y1
    }

    /// Liang–Barsky clip: does the closed segment `a–b` touch the rectangle?
    pub fn intersects_segment(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (p, q) in [
            (-dx, a.0 - self.x0),
            (dx, self.x1 - a.0),
            (-dy, a.1 - self.y0),
            (dy, self.y1 - a.1),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }

    /// Closed ring of the rectangle boundary grown by `margin`.
    pub fn ring(&self, margin: f64) -> Vec<(f64, f64)> {
        let (x0, y0, x1, y1) = (
            self.x0 - margin,
            self.y0 - margin,
            self.x1 + margin,
            self.y1 + margin,
        );
        vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]
    }
}

pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

pub fn point_polyline_distance(p: (f64, f64), line: &[(f64, f64)]) -> f64 {
    line.windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Turn probabilities at an intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnProbabilities {
    pub left: f64,
    pub straight: f64,
    pub right: f64,
}

impl Default for TurnProbabilities {
    fn default() -> Self {
        Self {
            left: 0.25,
            straight: 0.5,
            right: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManhattanGridSpec {
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub block_width: f64,
    pub block_height: f64,
    /// Explicit building footprint; must match the pitch minus the road
    /// corridor when given.
    pub building: Option<(f64, f64)>,
    pub sidewalk_width: f64,
    pub lanes_per_direction: usize,
    pub lane_width: f64,
    pub vehicle_speed_kmh: f64,
    pub turns: TurnProbabilities,
}

impl Default for ManhattanGridSpec {
    fn default() -> Self {
        Self {
            blocks_x: 3,
            blocks_y: 3,
            block_width: 433.0,
            block_height: 250.0,
            building: None,
            sidewalk_width: 3.0,
            lanes_per_direction: 2,
            lane_width: 3.5,
            vehicle_speed_kmh: 60.0,
            turns: TurnProbabilities::default(),
        }
    }
}

/// Intersection coordinates and the index pairs of adjacent intersections.
pub type RoadGraph = (Vec<(f64, f64)>, Vec<(usize, usize)>);

/// One directed lane: a straight line at a fixed cross coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneLine {
    pub heading: Heading,
    /// Index of the road (row `j` for horizontal, column `i` for vertical).
    pub road: usize,
    pub lane: usize,
    /// y for horizontal lanes, x for vertical lanes.
    pub coord: f64,
    pub start: (f64, f64),
    pub end: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManhattanGrid {
    spec: ManhattanGridSpec,
    buildings: Vec<Rect>,
    lanes: Vec<LaneLine>,
}

pub fn build_manhattan_grid(spec: &ManhattanGridSpec) -> Result<ManhattanGrid> {
    if spec.blocks_x == 0 || spec.blocks_y == 0 {
        return Err(invalid(
            "ManhattanGridSpec",
            "need at least one block in each direction",
        ));
    }
    for (name, v) in [
        ("block_width", spec.block_width),
        ("block_height", spec.block_height),
        ("sidewalk_width", spec.sidewalk_width),
        ("lane_width", spec.lane_width),
        ("vehicle_speed_kmh", spec.vehicle_speed_kmh),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(
                "ManhattanGridSpec",
                format!("{name} must be positive, got {v}"),
            ));
        }
    }
    if spec.lanes_per_direction == 0 {
        return Err(invalid(
            "ManhattanGridSpec",
            "need at least one lane per direction",
        ));
    }
    let t = spec.turns;
    if [t.left, t.straight, t.right]
        .iter()
        .any(|p| !(0.0..=1.0).contains(p))
        || (t.left + t.straight + t.right - 1.0).abs() > 1e-9
    {
        return Err(invalid(
            "ManhattanGridSpec",
            format!("turn probabilities must be in [0,1] and sum to 1, got {t:?}"),
        ));
    }
    let half_corridor = spec.lanes_per_direction as f64 * spec.lane_width + spec.sidewalk_width;
    let bw = spec.block_width - 2.0 * half_corridor;
    let bh = spec.block_height - 2.0 * half_corridor;
    if bw <= 0.0 || bh <= 0.0 {
        return Err(Error::Geometry(format!(
            "road corridor of {} m leaves no room for buildings in a {} x {} m block",
            2.0 * half_corridor,
            spec.block_width,
            spec.block_height
        )));
    }
    if let Some((w, h)) = spec.building {
        if (w - bw).abs() > 1e-9 || (h - bh).abs() > 1e-9 {
            return Err(Error::Geometry(format!(
                "building {w} x {h} m inconsistent with block pitch and corridor (expected {bw} x {bh} m)"
            )));
        }
    }

    let mut buildings = Vec::with_capacity(spec.blocks_x * spec.blocks_y);
    for j in 0..spec.blocks_y {
        for i in 0..spec.blocks_x {
            let x0 = i as f64 * spec.block_width + half_corridor;
            let y0 = j as f64 * spec.block_height + half_corridor;
            buildings.push(Rect {
                x0,
                y0,
                x1: x0 + bw,
                y1: y0 + bh,
            });
        }
    }

    let road_half = spec.lanes_per_direction as f64 * spec.lane_width;
    let x_max = spec.blocks_x as f64 * spec.block_width;
    let y_max = spec.blocks_y as f64 * spec.block_height;
    let mut lanes = Vec::new();
    for heading in Heading::ALL {
        let roads = if heading.is_horizontal() {
            spec.blocks_y + 1
        } else {
            spec.blocks_x + 1
        };
        for road in 0..roads {
            let center = if heading.is_horizontal() {
                road as f64 * spec.block_height
            } else {
                road as f64 * spec.block_width
            };
            for lane in 0..spec.lanes_per_direction {
                let coord = lane_coord(spec, center, heading, lane);
                let (start, end) = if heading.is_horizontal() {
                    ((-road_half, coord), (x_max + road_half, coord))
                } else {
                    ((coord, -road_half), (coord, y_max + road_half))
                };
                lanes.push(LaneLine {
                    heading,
                    road,
                    lane,
                    coord,
                    start,
                    end,
                });
            }
        }
    }

    Ok(ManhattanGrid {
        spec: spec.clone(),
        buildings,
        lanes,
    })
}

/// Cross coordinate of `lane` for traffic with `heading` on the road whose
/// centre line is at `center` (right-hand traffic).
fn lane_coord(spec: &ManhattanGridSpec, center: f64, heading: Heading, lane: usize) -> f64 {
    let offset = (lane as f64 + 0.5) * spec.lane_width;
    match heading {
        Heading::East | Heading::South => center - offset,
        Heading::West | Heading::North => center + offset,
    }
}

impl ManhattanGrid {
    pub fn spec(&self) -> &ManhattanGridSpec {
        &self.spec
    }

    pub fn buildings(&self) -> &[Rect] {
        &self.buildings
    }

    pub fn lanes(&self) -> &[LaneLine] {
        &self.lanes
    }

    pub fn blocks(&self) -> (usize, usize) {
        (self.spec.blocks_x, self.spec.blocks_y)
    }

    /// `(width, height)` of the block-pitch area, `nx·W × ny·H`.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.spec.blocks_x as f64 * self.spec.block_width,
            self.spec.blocks_y as f64 * self.spec.block_height,
        )
    }

    pub fn road_width(&self) -> f64 {
        2.0 * self.spec.lanes_per_direction as f64 * self.spec.lane_width
    }

    pub fn lane_count_per_road(&self) -> usize {
        2 * self.spec.lanes_per_direction
    }

    pub fn vehicle_speed_mps(&self) -> f64 {
        self.spec.vehicle_speed_kmh / 3.6
    }

    pub(crate) fn lane_coord(&self, center: f64, heading: Heading, lane: usize) -> f64 {
        lane_coord(&self.spec, center, heading, lane)
    }

    /// Centre line of road `index` perpendicular to the travel axis of a
    /// `heading`-bound vehicle crossing it.
    pub(crate) fn cross_road_center(&self, heading: Heading, index: usize) -> f64 {
        if heading.is_horizontal() {
            index as f64 * self.spec.block_width
        } else {
            index as f64 * self.spec.block_height
        }
    }

    pub(crate) fn road_center(&self, heading: Heading, road: usize) -> f64 {
        if heading.is_horizontal() {
            road as f64 * self.spec.block_height
        } else {
            road as f64 * self.spec.block_width
        }
    }

    /// Number of roads crossed by a `heading`-bound vehicle, i.e. the
    /// intersection indices along its axis are `0..count`.
    pub(crate) fn crossings(&self, heading: Heading) -> usize {
        if heading.is_horizontal() {
            self.spec.blocks_x + 1
        } else {
            self.spec.blocks_y + 1
        }
    }

    /// Sidewalk centre lines: one closed ring around every building.
    pub fn sidewalks(&self) -> Vec<Vec<(f64, f64)>> {
        let margin = 0.5 * self.spec.sidewalk_width;
        self.buildings.iter().map(|b| b.ring(margin)).collect()
    }

    pub fn distance_to_lanes(&self, p: (f64, f64)) -> f64 {
        self.lanes
            .iter()
            .map(|l| point_segment_distance(p, l.start, l.end))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to_sidewalks(&self, p: (f64, f64)) -> f64 {
        self.sidewalks()
            .iter()
            .map(|ring| point_polyline_distance(p, ring))
            .fold(f64::INFINITY, f64::min)
    }

    /// Road network as intersections and the road segments joining
    /// adjacent intersections.
    pub fn road_graph(&self) -> RoadGraph {
        let (nx, ny) = (self.spec.blocks_x, self.spec.blocks_y);
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut edges = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push((
                    i as f64 * self.spec.block_width,
                    j as f64 * self.spec.block_height,
                ));
                if i < nx {
                    edges.push((id(i, j), id(i + 1, j)));
                }
                if j < ny {
                    edges.push((id(i, j), id(i, j + 1)));
                }
            }
        }
        (nodes, edges)
    }

    pub fn is_connected(&self) -> bool {
        let (nodes, edges) = self.road_graph();
        let mut adj = vec![Vec::new(); nodes.len()];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
