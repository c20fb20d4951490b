use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, DEFAULT_INDEX_CELL};
use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Point2, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// A single straight corridor: two long walls with end caps.
    Corridor,
    /// A hallway with rooms on both sides, each entered through a door.
    RoomsOffHallway,
    /// One large open room with square pillars.
    Lobby,
}

impl Layout {
    pub const ALL: [Layout; 3] = [Layout::Corridor, Layout::RoomsOffHallway, Layout::Lobby];

    pub fn name(self) -> &'static str {
        match self {
            Layout::Corridor => "corridor",
            Layout::RoomsOffHallway => "rooms-off-hallway",
            Layout::Lobby => "lobby",
        }
    }

    pub fn from_name(s: &str) -> Option<Layout> {
        Layout::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// Parameters of a synthetic building. Everything outside the free space,
/// up to the window edge, is wall.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub layout: Layout,
    pub width: f64,
    pub height: f64,
    pub wall_thickness: f64,
    pub door_width: f64,
    /// Width of the hallway (rooms layout) in meters.
    pub hallway_width: f64,
    /// Rooms on each side of the hallway.
    pub rooms_per_side: u32,
    /// Pillars in the lobby.
    pub pillars: u32,
    pub pillar_size: f64,
    /// Randomizes door and pillar placement.
    pub seed: u64,
}

impl WorldSpec {
    pub fn new(layout: Layout) -> Self {
        let base = WorldSpec {
            layout,
            width: 12.0,
            height: 3.0,
            wall_thickness: 0.25,
            door_width: 0.9,
            hallway_width: 1.6,
            rooms_per_side: 3,
            pillars: 4,
            pillar_size: 0.5,
            seed: 0,
        };
        match layout {
            Layout::Corridor => base,
            Layout::RoomsOffHallway => WorldSpec {
                width: 10.0,
                height: 7.0,
                wall_thickness: 0.15,
                ..base
            },
            Layout::Lobby => WorldSpec {
                width: 9.0,
                height: 7.0,
                wall_thickness: 0.2,
                ..base
            },
        }
    }

    pub fn window(&self) -> Result<Rect> {
        Rect::from_size(self.width, self.height)
    }
}

/// A synthetic world: ground truth plus a route through its free space.
#[derive(Clone, Debug)]
pub struct World {
    pub spec: WorldSpec,
    pub truth: Coloring,
    /// Waypoints of a route that visits every part of the free space.
    pub route: Vec<Point2>,
    /// Boundary rings of the free space; a point is free when it lies inside
    /// an odd number of them.
    pub rings: Vec<Vec<Point2>>,
}

impl World {
    /// Free-space test straight from the construction, independent of the
    /// coloring.
    pub fn is_free(&self, p: Point2) -> bool {
        self.rings.iter().filter(|r| point_in_polygon(p, r)).count() % 2 == 1
    }
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleWorld(msg.into())
}

fn rect_ring(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point2> {
    vec![
        Point2::new(x0, y0),
        Point2::new(x1, y0),
        Point2::new(x1, y1),
        Point2::new(x0, y1),
    ]
}

/// Build the ground-truth coloring and route for `spec`.
pub fn make_world(spec: &WorldSpec) -> Result<World> {
    let window = spec.window().map_err(|e| infeasible(e.to_string()))?;
    let t = spec.wall_thickness;
    if !(t > 0.0) || 2.0 * t >= spec.width.min(spec.height) {
        return Err(infeasible(format!("wall thickness {t} does not fit in the window")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (rings, route) = match spec.layout {
        Layout::Corridor => corridor(spec),
        Layout::RoomsOffHallway => rooms_off_hallway(spec, &mut rng)?,
        Layout::Lobby => lobby(spec, &mut rng)?,
    };
    let center = window.center();
    let inside = rings.iter().filter(|r| point_in_polygon(center, r)).count() % 2 == 1;
    let anchor = if inside { Color::White } else { Color::Black };
    let truth = Coloring::from_polygons(window, anchor, DEFAULT_INDEX_CELL, &rings)
        .map_err(|e| infeasible(format!("{} layout is not a valid coloring: {e}", spec.layout.name())))?;
    let world = World {
        spec: *spec,
        truth,
        route,
        rings,
    };
    if let Some(p) = world.route.iter().find(|&&p| !world.is_free(p)) {
        return Err(infeasible(format!("route point ({}, {}) is not in free space", p.x, p.y)));
    }
    Ok(world)
}

fn corridor(spec: &WorldSpec) -> (Vec<Vec<Point2>>, Vec<Point2>) {
    let (w, h, t) = (spec.width, spec.height, spec.wall_thickness);
    let ring = rect_ring(t, t, w - t, h - t);
    let y = 0.5 * h;
    let margin = (t + 0.5).min(0.5 * w);
    let route = vec![Point2::new(margin, y), Point2::new(w - margin, y), Point2::new(margin, y)];
    (vec![ring], route)
}

fn rooms_off_hallway(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<Point2>>, Vec<Point2>)> {
    let (w, h, t) = (spec.width, spec.height, spec.wall_thickness);
    let n = spec.rooms_per_side.max(1) as usize;
    let hy0 = 0.5 * (h - spec.hallway_width);
    let hy1 = hy0 + spec.hallway_width;
    let room_w = (w - 2.0 * t - (n as f64 - 1.0) * t) / n as f64;
    let dw = spec.door_width;
    if hy0 - 2.0 * t < 0.5 || room_w < dw + 0.2 || dw <= 0.0 {
        return Err(infeasible("rooms, doors and hallway do not fit in the window"));
    }
    let room_x = |k: usize| t + k as f64 * (room_w + t);
    let mut doors = |k: usize| {
        let slack = room_w - dw - 0.2;
        let x0 = room_x(k) + 0.1 + rng.random_range(0.0..=slack);
        (x0, x0 + dw)
    };
    let lower: Vec<(f64, f64)> = (0..n).map(&mut doors).collect();
    let upper: Vec<(f64, f64)> = (0..n).map(&mut doors).collect();

    // Counter-clockwise walk: along the bottom of the hallway dipping into
    // each lower room, then back along the top dipping into each upper room.
    let mut ring = vec![Point2::new(t, hy0)];
    for (k, &(d0, d1)) in lower.iter().enumerate() {
        let (r0, r1) = (room_x(k), room_x(k) + room_w);
        ring.extend([
            Point2::new(d0, hy0),
            Point2::new(d0, hy0 - t),
            Point2::new(r0, hy0 - t),
            Point2::new(r0, t),
            Point2::new(r1, t),
            Point2::new(r1, hy0 - t),
            Point2::new(d1, hy0 - t),
            Point2::new(d1, hy0),
        ]);
    }
    ring.push(Point2::new(w - t, hy0));
    ring.push(Point2::new(w - t, hy1));
    for (k, &(d0, d1)) in upper.iter().enumerate().rev() {
        let (r0, r1) = (room_x(k), room_x(k) + room_w);
        ring.extend([
            Point2::new(d1, hy1),
            Point2::new(d1, hy1 + t),
            Point2::new(r1, hy1 + t),
            Point2::new(r1, h - t),
            Point2::new(r0, h - t),
            Point2::new(r0, hy1 + t),
            Point2::new(d0, hy1 + t),
            Point2::new(d0, hy1),
        ]);
    }
    ring.push(Point2::new(t, hy1));
    // Drop points repeated where a door meets a room edge or the hallway end.
    ring.dedup();
    if ring.first() == ring.last() {
        ring.pop();
    }

    let yc = 0.5 * (hy0 + hy1);
    let mut route = vec![Point2::new(t + 0.5, yc)];
    for k in 0..n {
        let (l0, l1) = lower[k];
        let (u0, u1) = upper[k];
        let (lx, ux) = (0.5 * (l0 + l1), 0.5 * (u0 + u1));
        let (rx, ly, uy) = (room_x(k) + 0.5 * room_w, 0.5 * (t + hy0 - t), 0.5 * (hy1 + t + h - t));
        route.extend([
            Point2::new(lx, yc),
            Point2::new(lx, hy0 - t - 0.3),
            Point2::new(rx, ly),
            Point2::new(lx, hy0 - t - 0.3),
            Point2::new(lx, yc),
            Point2::new(ux, yc),
            Point2::new(ux, hy1 + t + 0.3),
            Point2::new(rx, uy),
            Point2::new(ux, hy1 + t + 0.3),
            Point2::new(ux, yc),
        ]);
    }
    route.push(Point2::new(w - t - 0.5, yc));
    Ok((vec![ring], route))
}

fn lobby(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<Point2>>, Vec<Point2>)> {
    let (w, h, t) = (spec.width, spec.height, spec.wall_thickness);
    let s = spec.pillar_size;
    let mut rings = vec![rect_ring(t, t, w - t, h - t)];
    let slots = [(1.0 / 3.0, 1.0 / 3.0), (2.0 / 3.0, 1.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0), (2.0 / 3.0, 2.0 / 3.0)];
    if spec.pillars as usize > slots.len() {
        return Err(infeasible(format!("at most {} pillars fit in the lobby", slots.len())));
    }
    if s <= 0.0 || s > 0.2 * w.min(h) {
        return Err(infeasible(format!("pillar size {s} does not fit in the lobby")));
    }
    for &(fx, fy) in slots.iter().take(spec.pillars as usize) {
        let cx = fx * w + rng.random_range(-0.3..=0.3);
        let cy = fy * h + rng.random_range(-0.3..=0.3);
        rings.push(rect_ring(cx - 0.5 * s, cy - 0.5 * s, cx + 0.5 * s, cy + 0.5 * s));
    }
    let m = t + 0.8;
    let mid = 0.5 * h;
    let route = vec![
        Point2::new(m, m),
        Point2::new(w - m, m),
        Point2::new(w - m, h - m),
        Point2::new(m, h - m),
        Point2::new(m, mid),
        Point2::new(w - m, mid),
    ];
    Ok((rings, route))
}
