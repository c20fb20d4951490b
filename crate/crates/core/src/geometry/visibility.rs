use super::{Cone, Point2, Segment};

/// An edge handed to the sweep. `corner[0]` / `corner[1]` say whether the
/// segment's `a` / `b` endpoint may produce a corner feature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepEdge {
    pub id: u32,
    pub seg: Segment,
    pub corner: [bool; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureKind {
    Face,
    Corner,
}

/// Something the sensor can see: a maximal unoccluded piece of an edge, or
/// a vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibleFeature {
    pub kind: FeatureKind,
    pub edge: u32,
    /// Visible piece; for corners `a == b` is the vertex.
    pub a: Point2,
    pub b: Point2,
    /// Distance from the apex to the closest visible point.
    pub depth: f64,
    /// Angle between the face and the line of sight to its closest point,
    /// in `[0, pi/2]`; `pi/2` means the face is seen head-on. Zero for corners.
    pub projection_angle: f64,
    /// Angular width of the visible piece as seen from the apex. Zero for
    /// corners.
    pub subtended_angle: f64,
    /// Angular interval relative to the cone heading.
    pub angles: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityResult {
    /// Features ordered by increasing depth.
    pub features: Vec<VisibleFeature>,
    /// Total angular width covered by faces.
    pub covered_angle: f64,
    /// Whether faces cover the whole aperture.
    pub full_coverage: bool,
    /// Largest distance to any visible point.
    pub farthest: f64,
}

impl VisibilityResult {
    /// Range beyond which nothing added to the scene could become visible.
    pub fn extent(&self, max_range: f64) -> f64 {
        if self.full_coverage {
            self.farthest.min(max_range)
        } else {
            max_range
        }
    }
}

const ANGLE_TOL: f64 = 1e-12;

struct Piece {
    edge: u32,
    seg: Segment,
    lo: f64,
    hi: f64,
}

/// Distance along the unit ray `u` from `o` to the line through `seg`.
fn line_depth(o: Point2, u: Point2, seg: &Segment) -> Option<f64> {
    let e = seg.dir();
    let denom = u.cross(e);
    if denom == 0.0 {
        return None;
    }
    let t = (seg.a - o).cross(e) / denom;
    (t >= 0.0).then_some(t)
}

/// Features visible inside `cone`, ordered by depth.
pub fn visibility_sweep(edges: &[SweepEdge], cone: &Cone) -> Vec<VisibleFeature> {
    visibility_sweep_detailed(edges, cone).features
}

/// Radial sweep over the cone aperture.
///
/// Each edge is clipped to the sector, the aperture is cut at every clipped
/// endpoint angle, and inside each elementary interval the closest active
/// edge wins. Runs of intervals won by the same edge become one face.
pub fn visibility_sweep_detailed(edges: &[SweepEdge], cone: &Cone) -> VisibilityResult {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut corners: Vec<(u32, Point2, f64)> = Vec::new();
    for e in edges {
        let Some((t0, t1)) = cone.clip_params(&e.seg, cone.max_range) else {
            continue;
        };
        let p0 = e.seg.a.lerp(e.seg.b, t0);
        let p1 = e.seg.a.lerp(e.seg.b, t1);
        if t0 <= 0.0 && e.corner[0] {
            corners.push((e.id, e.seg.a, cone.relative_angle(e.seg.a)));
        }
        if t1 >= 1.0 && e.corner[1] {
            corners.push((e.id, e.seg.b, cone.relative_angle(e.seg.b)));
        }
        let (a0, a1) = (cone.relative_angle(p0), cone.relative_angle(p1));
        let (lo, hi) = (a0.min(a1), a0.max(a1));
        if hi - lo > ANGLE_TOL {
            pieces.push(Piece {
                edge: e.id,
                seg: e.seg,
                lo: lo.max(-cone.half_angle),
                hi: hi.min(cone.half_angle),
            });
        }
    }

    let depth_at = |p: &Piece, theta: f64| -> Option<f64> {
        let u = Point2::from_polar(1.0, cone.heading + theta);
        line_depth(cone.apex, u, &p.seg)
    };

    // Sweep events.
    let mut cuts: Vec<f64> = pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= ANGLE_TOL);
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| pieces[i].lo.total_cmp(&pieces[j].lo));

    let mut runs: Vec<(usize, f64, f64)> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut next = 0;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        while next < order.len() && pieces[order[next]].lo <= t0 + ANGLE_TOL {
            active.push(order[next]);
            next += 1;
        }
        active.retain(|&i| pieces[i].hi > t0 + ANGLE_TOL);
        let mid = 0.5 * (t0 + t1);
        let mut best: Option<(f64, u32, usize)> = None;
        for &i in &active {
            let p = &pieces[i];
            if !(p.lo <= mid && mid <= p.hi) {
                continue;
            }
            if let Some(d) = depth_at(p, mid) {
                if best.is_none_or(|(bd, be, _)| d < bd || (d == bd && p.edge < be)) {
                    best = Some((d, p.edge, i));
                }
            }
        }
        if let Some((_, _, i)) = best {
            match runs.last_mut() {
                Some(last) if last.0 == i && (last.2 - t0).abs() <= ANGLE_TOL => last.2 = t1,
                _ => runs.push((i, t0, t1)),
            }
        }
    }

    let mut features = Vec::new();
    let mut covered = 0.0;
    let mut farthest: f64 = 0.0;
    for (i, t0, t1) in runs {
        let p = &pieces[i];
        let ray = |t: f64| {
            let u = Point2::from_polar(1.0, cone.heading + t);
            cone.apex + u * depth_at(p, t).unwrap_or(0.0)
        };
        let (a, b) = (ray(t0), ray(t1));
        let vis = Segment::new(a, b);
        let cp = vis.closest_point(cone.apex);
        let los = cp - cone.apex;
        let e = p.seg.dir();
        let sin = if los.norm() > 0.0 {
            (los.cross(e) / (los.norm() * e.norm())).abs().min(1.0)
        } else {
            1.0
        };
        farthest = farthest.max(a.dist(cone.apex)).max(b.dist(cone.apex));
        covered += t1 - t0;
        features.push(VisibleFeature {
            kind: FeatureKind::Face,
            edge: p.edge,
            a,
            b,
            depth: los.norm(),
            projection_angle: sin.asin(),
            subtended_angle: t1 - t0,
            angles: (t0, t1),
        });
    }

    corners.sort_by(|x, y| x.1.x.total_cmp(&y.1.x).then(x.1.y.total_cmp(&y.1.y)).then(x.0.cmp(&y.0)));
    corners.dedup_by(|x, y| x.1 == y.1);
    for (edge, v, theta) in corners {
        let d = v.dist(cone.apex);
        let tol = 1e-9 * (1.0 + d);
        let occluded = pieces.iter().any(|p| {
            p.lo - ANGLE_TOL <= theta
                && theta <= p.hi + ANGLE_TOL
                && depth_at(p, theta).is_some_and(|pd| pd < d - tol)
        });
        if !occluded {
            farthest = farthest.max(d);
            features.push(VisibleFeature {
                kind: FeatureKind::Corner,
                edge,
                a: v,
                b: v,
                depth: d,
                projection_angle: 0.0,
                subtended_angle: 0.0,
                angles: (theta, theta),
            });
        }
    }

    features.sort_by(|x, y| {
        x.depth
            .total_cmp(&y.depth)
            .then(x.kind.cmp(&y.kind))
            .then(x.edge.cmp(&y.edge))
            .then(x.angles.0.total_cmp(&y.angles.0))
    });
    VisibilityResult {
        features,
        covered_angle: covered,
        full_coverage: covered >= 2.0 * cone.half_angle - 1e-9,
        farthest,
    }
}
