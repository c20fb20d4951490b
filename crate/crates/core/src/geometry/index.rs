use super::{grid_trace_segment, CellCoord, Cone, GridSpec, Point2, Segment};

/// Nearest edge along a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub edge: u32,
}

/// Distance along a ray (unit `dir`) to `seg`, if it is hit within
/// `max_range`. Rays parallel to the segment never hit it.
pub fn ray_segment_hit(origin: Point2, dir: Point2, max_range: f64, seg: &Segment) -> Option<f64> {
    let e = seg.dir();
    let denom = dir.cross(e);
    if denom == 0.0 {
        return None;
    }
    let ao = seg.a - origin;
    let t = ao.cross(e) / denom;
    let s = ao.cross(dir) / denom;
    if (0.0..=1.0).contains(&s) && t >= 0.0 && t <= max_range {
        Some(t)
    } else {
        None
    }
}

/// Uniform grid over the window; each cell lists (sorted) the ids of the
/// edges whose supercover includes it.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeGridIndex {
    grid: GridSpec,
    cells: Vec<Vec<u32>>,
    segments: Vec<Option<Segment>>,
    count: usize,
}

impl EdgeGridIndex {
    pub fn new(grid: GridSpec) -> Self {
        EdgeGridIndex {
            grid,
            cells: vec![Vec::new(); grid.len()],
            segments: Vec::new(),
            count: 0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn segment(&self, id: u32) -> Option<&Segment> {
        self.segments.get(id as usize).and_then(|s| s.as_ref())
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.segments
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|_| i as u32))
    }

    pub fn cell(&self, c: CellCoord) -> &[u32] {
        &self.cells[self.grid.linear(c)]
    }

    pub fn insert(&mut self, id: u32, seg: Segment) {
        let idx = id as usize;
        if self.segments.len() <= idx {
            self.segments.resize(idx + 1, None);
        }
        assert!(self.segments[idx].is_none(), "edge {id} indexed twice");
        self.segments[idx] = Some(seg);
        self.count += 1;
        for c in grid_trace_segment(&seg, &self.grid) {
            let list = &mut self.cells[self.grid.linear(c)];
            if let Err(pos) = list.binary_search(&id) {
                list.insert(pos, id);
            }
        }
    }

    pub fn remove(&mut self, id: u32) -> Option<Segment> {
        let seg = self.segments.get_mut(id as usize)?.take()?;
        self.count -= 1;
        for c in grid_trace_segment(&seg, &self.grid) {
            let list = &mut self.cells[self.grid.linear(c)];
            if let Ok(pos) = list.binary_search(&id) {
                list.remove(pos);
            }
        }
        while matches!(self.segments.last(), Some(None)) {
            self.segments.pop();
        }
        Some(seg)
    }

    /// Sorted, de-duplicated ids of edges listed in any of `cells`.
    pub fn edges_in_cells(&self, cells: impl IntoIterator<Item = CellCoord>) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for c in cells {
            out.extend_from_slice(self.cell(c));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Candidate edges for an intersection test against `seg`.
    pub fn candidates(&self, seg: &Segment) -> Vec<u32> {
        self.edges_in_cells(grid_trace_segment(seg, &self.grid))
    }

    /// Edges sharing at least one cell with edge `id`, excluding itself.
    pub fn co_occurring(&self, id: u32) -> Vec<u32> {
        let Some(seg) = self.segment(id) else {
            return Vec::new();
        };
        let mut v = self.candidates(seg);
        v.retain(|&e| e != id);
        v
    }

    /// Edges that may overlap a cone (up to its max range).
    pub fn edges_in_cone(&self, cone: &Cone) -> Vec<u32> {
        let poly = cone.enclosing_polygon(cone.max_range);
        self.edges_in_cells(self.grid.cells_overlapping_convex(&poly))
    }

    /// Nearest indexed edge hit by the ray within `max_range`, walking cells
    /// front to back. The walk stops once the best hit lies before the next
    /// cell's entry point. Ties go to the smaller id.
    pub fn ray_cast(&self, origin: Point2, direction: f64, max_range: f64) -> Option<RayHit> {
        let dir = Point2::from_polar(1.0, direction);
        let end = origin + dir * max_range;
        let ray = Segment::new(origin, end);
        let mut best: Option<RayHit> = None;
        let mut tested: Vec<u32> = Vec::new();
        for c in grid_trace_segment(&ray, &self.grid) {
            if let Some(b) = best {
                let entry = self
                    .grid
                    .cell_rect(c)
                    .clip_params(&ray)
                    .map(|(t0, _)| t0 * max_range)
                    .unwrap_or(f64::INFINITY);
                if entry > b.distance {
                    break;
                }
            }
            for &id in self.cell(c) {
                if tested.contains(&id) {
                    continue;
                }
                tested.push(id);
                let seg = self.segments[id as usize].as_ref().expect("indexed edge");
                if let Some(t) = ray_segment_hit(origin, dir, max_range, seg) {
                    let better = match best {
                        None => true,
                        Some(b) => t < b.distance || (t == b.distance && id < b.edge),
                    };
                    if better {
                        best = Some(RayHit { distance: t, edge: id });
                    }
                }
            }
        }
        best
    }

    /// Reference implementation: test every edge.
    pub fn ray_cast_brute_force(&self, origin: Point2, direction: f64, max_range: f64) -> Option<RayHit> {
        let dir = Point2::from_polar(1.0, direction);
        let mut best: Option<RayHit> = None;
        for id in self.ids() {
            let seg = self.segment(id).unwrap();
            if let Some(t) = ray_segment_hit(origin, dir, max_range, seg) {
                let better = match best {
                    None => true,
                    Some(b) => t < b.distance || (t == b.distance && id < b.edge),
                };
                if better {
                    best = Some(RayHit { distance: t, edge: id });
                }
            }
        }
        best
    }
}
