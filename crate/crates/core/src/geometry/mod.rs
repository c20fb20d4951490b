//! Planar primitives shared by the coloring, the sensor models and the
//! simulator.
//!
//! Everything here works in double precision with a single absolute
//! tolerance, [`EPS_GEOM`]. Contacts closer than that are treated as
//! degenerate by the callers that build colorings.

mod grid;
mod index;
mod visibility;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{grid_trace_segment, CellCoord, GridSpec};
pub use index::{ray_segment_hit, EdgeGridIndex, RayHit};
pub use visibility::{
    visibility_sweep, visibility_sweep_detailed, FeatureKind, SweepEdge, VisibilityResult,
    VisibleFeature,
};

/// Absolute geometric tolerance in meters.
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Point2::new(r * angle.cos(), r * angle.sin())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A robot or sensor pose: position plus heading in radians.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub pos: Point2,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            pos: Point2::new(x, y),
            heading,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn dir(&self) -> Point2 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> Point2 {
        self.a.lerp(self.b, 0.5)
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.b, self.a)
    }

    /// Closest point on the segment to `p`.
    pub fn closest_point(&self, p: Point2) -> Point2 {
        let d = self.dir();
        let l2 = d.norm_sq();
        if l2 == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(d) / l2).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance_to_point(&self, p: Point2) -> f64 {
        self.closest_point(p).dist(p)
    }

    pub fn bbox(&self) -> Rect {
        Rect {
            min: Point2::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            max: Point2::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        }
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// `p` is assumed collinear with the segment; checks it lies within its span.
fn within_span(s: &Segment, p: Point2) -> bool {
    p.x >= s.a.x.min(s.b.x) && p.x <= s.a.x.max(s.b.x) && p.y >= s.a.y.min(s.b.y) && p.y <= s.a.y.max(s.b.y)
}

/// True iff the segments meet anywhere other than at a shared endpoint.
///
/// Interiors crossing, an endpoint of one touching the interior of the other,
/// and collinear overlap all count. Two segments whose only contact is an
/// endpoint they both have do not intersect.
pub fn segments_properly_intersect(s1: &Segment, s2: &Segment) -> bool {
    let cases = [
        (s1.a, s1.b, s2.a, s2.b),
        (s1.a, s1.b, s2.b, s2.a),
        (s1.b, s1.a, s2.a, s2.b),
        (s1.b, s1.a, s2.b, s2.a),
    ];
    for (p1, o1, p2, o2) in cases {
        if p1 == p2 {
            let u = o1 - p1;
            let v = o2 - p1;
            // Collinear and pointing the same way means they overlap.
            return u.cross(v) == 0.0 && u.dot(v) > 0.0;
        }
    }
    let d1 = orient(s1.a, s1.b, s2.a);
    let d2 = orient(s1.a, s1.b, s2.b);
    let d3 = orient(s2.a, s2.b, s1.a);
    let d4 = orient(s2.a, s2.b, s1.b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within_span(s1, s2.a))
        || (d2 == 0.0 && within_span(s1, s2.b))
        || (d3 == 0.0 && within_span(s2, s1.a))
        || (d4 == 0.0 && within_span(s2, s1.b))
}

/// Minimum distance between two segments (zero when they touch).
pub fn segment_distance(s1: &Segment, s2: &Segment) -> f64 {
    if segments_properly_intersect(s1, s2) || s1.a == s2.a || s1.a == s2.b || s1.b == s2.a || s1.b == s2.b {
        return 0.0;
    }
    s1.distance_to_point(s2.a)
        .min(s1.distance_to_point(s2.b))
        .min(s2.distance_to_point(s1.a))
        .min(s2.distance_to_point(s1.b))
}

/// Intersection of two segments' interiors as parameters along `s1`, if they
/// cross transversally.
pub fn segment_crossing_param(s1: &Segment, s2: &Segment) -> Option<(f64, f64)> {
    let r = s1.dir();
    let s = s2.dir();
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let qp = s2.a - s1.a;
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

/// Axis-aligned rectangle, used for the observation window and grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

/// One side of a rectangle, named counter-clockwise from the bottom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max.x <= min.x || max.y <= min.y {
            return Err(Error::InvalidGeometry(format!(
                "rectangle needs positive area, got min=({}, {}) max=({}, {})",
                min.x, min.y, max.x, max.y
            )));
        }
        Ok(Rect { min, max })
    }

    pub fn from_size(width: f64, height: f64) -> Result<Self> {
        Rect::new(Point2::new(0.0, 0.0), Point2::new(width, height))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn center(&self) -> Point2 {
        self.min.lerp(self.max, 0.5)
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Inside and farther than `margin` from every side.
    pub fn contains_strictly(&self, p: Point2, margin: f64) -> bool {
        p.x > self.min.x + margin && p.x < self.max.x - margin && p.y > self.min.y + margin && p.y < self.max.y - margin
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        (p.x - self.min.x)
            .abs()
            .min((self.max.x - p.x).abs())
            .min((p.y - self.min.y).abs())
            .min((self.max.y - p.y).abs())
    }

    /// Side a boundary point lies on, or `None` when it is off the boundary or
    /// within `eps` of a corner.
    pub fn boundary_side(&self, p: Point2, eps: f64) -> Option<Side> {
        if self.corners().iter().any(|c| c.dist(p) <= eps) {
            return None;
        }
        let on_x = p.x >= self.min.x - eps && p.x <= self.max.x + eps;
        let on_y = p.y >= self.min.y - eps && p.y <= self.max.y + eps;
        if on_x && (p.y - self.min.y).abs() <= eps {
            Some(Side::Bottom)
        } else if on_y && (p.x - self.max.x).abs() <= eps {
            Some(Side::Right)
        } else if on_x && (p.y - self.max.y).abs() <= eps {
            Some(Side::Top)
        } else if on_y && (p.x - self.min.x).abs() <= eps {
            Some(Side::Left)
        } else {
            None
        }
    }

    /// Point at arc-length `s` along the perimeter, counter-clockwise from
    /// `min`.
    pub fn perimeter_point(&self, s: f64) -> Point2 {
        let (w, h) = (self.width(), self.height());
        let s = s.rem_euclid(self.perimeter());
        if s < w {
            Point2::new(self.min.x + s, self.min.y)
        } else if s < w + h {
            Point2::new(self.max.x, self.min.y + (s - w))
        } else if s < 2.0 * w + h {
            Point2::new(self.max.x - (s - w - h), self.max.y)
        } else {
            Point2::new(self.min.x, self.max.y - (s - 2.0 * w - h))
        }
    }

    /// Arc-length coordinate of a point on the boundary.
    pub fn perimeter_coord(&self, p: Point2) -> f64 {
        let (w, h) = (self.width(), self.height());
        let d = [
            (p.y - self.min.y).abs(),
            (p.x - self.max.x).abs(),
            (p.y - self.max.y).abs(),
            (p.x - self.min.x).abs(),
        ];
        let side = (0..4).min_by(|&i, &j| d[i].total_cmp(&d[j])).unwrap();
        match side {
            0 => (p.x - self.min.x).clamp(0.0, w),
            1 => w + (p.y - self.min.y).clamp(0.0, h),
            2 => w + h + (self.max.x - p.x).clamp(0.0, w),
            _ => 2.0 * w + h + (self.max.y - p.y).clamp(0.0, h),
        }
    }

    /// Window corners passed when walking the perimeter from coordinate `s0`
    /// to `s1`, counter-clockwise if `ccw`, excluding the end points.
    pub fn corners_between(&self, s0: f64, s1: f64, ccw: bool) -> Vec<Point2> {
        let (w, h) = (self.width(), self.height());
        let p = self.perimeter();
        let marks = [0.0, w, w + h, 2.0 * w + h];
        let corners = self.corners();
        let span = if ccw { (s1 - s0).rem_euclid(p) } else { (s0 - s1).rem_euclid(p) };
        let mut out: Vec<(f64, Point2)> = Vec::new();
        for (m, c) in marks.iter().zip(corners) {
            let off = if ccw { (m - s0).rem_euclid(p) } else { (s0 - m).rem_euclid(p) };
            if off > 0.0 && off < span {
                out.push((off, c));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.into_iter().map(|(_, c)| c).collect()
    }

    /// Sine of the angle a unit direction makes with the window side `side`.
    pub fn sin_with_side(side: Side, u: Point2) -> f64 {
        match side {
            Side::Bottom | Side::Top => u.y.abs(),
            Side::Left | Side::Right => u.x.abs(),
        }
    }

    /// Distance along a ray (unit `dir`) from an inside `origin` to the window
    /// boundary.
    pub fn exit_distance(&self, origin: Point2, dir: Point2) -> f64 {
        let mut t = f64::INFINITY;
        if dir.x > 0.0 {
            t = t.min((self.max.x - origin.x) / dir.x);
        } else if dir.x < 0.0 {
            t = t.min((self.min.x - origin.x) / dir.x);
        }
        if dir.y > 0.0 {
            t = t.min((self.max.y - origin.y) / dir.y);
        } else if dir.y < 0.0 {
            t = t.min((self.min.y - origin.y) / dir.y);
        }
        t.max(0.0)
    }

    /// Liang–Barsky parameter range of `seg` inside the closed rectangle.
    pub fn clip_params(&self, seg: &Segment) -> Option<(f64, f64)> {
        let d = seg.dir();
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        let checks = [
            (-d.x, seg.a.x - self.min.x),
            (d.x, self.max.x - seg.a.x),
            (-d.y, seg.a.y - self.min.y),
            (d.y, self.max.y - seg.a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        (t0 <= t1).then_some((t0, t1))
    }

    pub fn clip_segment(&self, seg: &Segment) -> Option<Segment> {
        let (t0, t1) = self.clip_params(seg)?;
        Some(Segment::new(seg.a.lerp(seg.b, t0), seg.a.lerp(seg.b, t1)))
    }
}

/// A sonar field of view: apex, heading, half aperture and range limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cone {
    pub apex: Point2,
    pub heading: f64,
    pub half_angle: f64,
    pub max_range: f64,
}

impl Cone {
    pub fn new(apex: Point2, heading: f64, half_angle: f64, max_range: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) || !(max_range > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "cone needs 0 < half_angle < pi/2 and max_range > 0, got {half_angle} and {max_range}"
            )));
        }
        Ok(Cone {
            apex,
            heading,
            half_angle,
            max_range,
        })
    }

    /// Angle of `p` relative to the heading, in (-pi, pi].
    pub fn relative_angle(&self, p: Point2) -> f64 {
        wrap_angle((p - self.apex).angle() - self.heading)
    }

    pub fn contains(&self, p: Point2) -> bool {
        let d = p - self.apex;
        d.norm() <= self.max_range && self.relative_angle(p).abs() <= self.half_angle
    }

    /// Convex polygon containing the sector of radius `radius`.
    pub fn enclosing_polygon(&self, radius: f64) -> Vec<Point2> {
        let steps = ((2.0 * self.half_angle) / 5f64.to_radians()).ceil().max(1.0) as usize;
        let dtheta = 2.0 * self.half_angle / steps as f64;
        let r = radius / (dtheta / 2.0).cos();
        let mut poly = Vec::with_capacity(steps + 3);
        poly.push(self.apex);
        poly.push(self.apex + Point2::from_polar(radius, self.heading - self.half_angle));
        for k in 0..steps {
            let th = self.heading - self.half_angle + (k as f64 + 0.5) * dtheta;
            poly.push(self.apex + Point2::from_polar(r, th));
        }
        poly.push(self.apex + Point2::from_polar(radius, self.heading + self.half_angle));
        poly
    }

    /// Sub-segment of `seg` inside the sector of radius `radius`, as a
    /// parameter range along `seg`.
    pub fn clip_params(&self, seg: &Segment, radius: f64) -> Option<(f64, f64)> {
        let d = seg.dir();
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        // Half-planes bounding the wedge: left boundary ray and right boundary ray.
        let left = Point2::from_polar(1.0, self.heading + self.half_angle);
        let right = Point2::from_polar(1.0, self.heading - self.half_angle);
        // Inside means cross(right, x) >= 0 and cross(x, left) >= 0.
        for (f0, fd) in [
            (right.cross(seg.a - self.apex), right.cross(d)),
            (-(left.cross(seg.a - self.apex)), -(left.cross(d))),
        ] {
            // f0 + t*fd >= 0
            if fd == 0.0 {
                if f0 < 0.0 {
                    return None;
                }
            } else {
                let r = -f0 / fd;
                if fd > 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t0 > t1 {
            return None;
        }
        // Forward half of the plane, so the wedge is convex and < pi.
        let fwd = Point2::from_polar(1.0, self.heading);
        let f0 = fwd.dot(seg.a - self.apex);
        let fd = fwd.dot(d);
        if fd == 0.0 {
            if f0 < 0.0 {
                return None;
            }
        } else {
            let r = -f0 / fd;
            if fd > 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
        if t0 > t1 {
            return None;
        }
        // Disk.
        let m = seg.a - self.apex;
        let a = d.norm_sq();
        if a == 0.0 {
            return None;
        }
        let b = 2.0 * m.dot(d);
        let c = m.norm_sq() - radius * radius;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let (r0, r1) = ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a));
        t0 = t0.max(r0);
        t1 = t1.min(r1);
        (t0 <= t1).then_some((t0, t1))
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Signed area (positive when counter-clockwise).
pub fn polygon_signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Even-odd point-in-polygon test; the polygon may self-intersect.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn polygon_bbox(poly: &[Point2]) -> Option<Rect> {
    let first = *poly.first()?;
    let mut r = Rect { min: first, max: first };
    for p in &poly[1..] {
        r.min.x = r.min.x.min(p.x);
        r.min.y = r.min.y.min(p.y);
        r.max.x = r.max.x.max(p.x);
        r.max.y = r.max.y.max(p.y);
    }
    Some(r)
}

/// Separating-axis test between a convex polygon and an axis-aligned box.
pub fn convex_polygon_intersects_rect(poly: &[Point2], rect: &Rect) -> bool {
    let Some(bb) = polygon_bbox(poly) else {
        return false;
    };
    if !bb.intersects(rect) {
        return false;
    }
    let corners = rect.corners();
    let n = poly.len();
    let area = polygon_signed_area(poly);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        if e.norm_sq() == 0.0 {
            continue;
        }
        // Outward side is to the right for a CCW polygon.
        let all_out = corners.iter().all(|&c| {
            let s = e.cross(c - a);
            if area >= 0.0 {
                s < 0.0
            } else {
                s > 0.0
            }
        });
        if all_out {
            return false;
        }
    }
    true
}
