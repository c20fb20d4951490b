//! Polygonal colorings of a rectangular window.
//!
//! A coloring is stored as its discontinuity graph plus the color of a fixed
//! anchor point. The color anywhere else follows from the parity of edge
//! crossings on the straight path from the anchor.

mod components;
mod edit;
mod export;
mod slab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    segment_distance, segments_properly_intersect, EdgeGridIndex, GridSpec, Point2, Rect, Segment, EPS_GEOM,
};

pub use components::Components;
pub use edit::{AppliedEdit, Edit, NewVertex, RevertToken, StatsDelta, VRef};
pub use export::{EdgeRecord, PolygonMap, VertexRecord};
pub use slab::Slab;

/// Smallest admissible sine of a vertex angle. Sharper vertices make the
/// state invalid.
pub const MIN_SIN_ANGLE: f64 = 1e-6;

/// Default cell size of the edge index, in meters.
pub const DEFAULT_INDEX_CELL: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flipped(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    pub fn flip_if(self, cond: bool) -> Color {
        if cond {
            self.flipped()
        } else {
            self
        }
    }

    pub fn is_black(self) -> bool {
        self == Color::Black
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Interior,
    Boundary,
}

impl VertexKind {
    pub fn degree(self) -> usize {
        match self {
            VertexKind::Interior => 2,
            VertexKind::Boundary => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub pos: Point2,
    pub kind: VertexKind,
    /// Incident edge ids, sorted.
    pub edges: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub v: [u32; 2],
}

impl Edge {
    pub fn other(&self, v: u32) -> u32 {
        if self.v[0] == v {
            self.v[1]
        } else {
            self.v[0]
        }
    }
}

/// Running sums that make the prior density O(1) to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CachedStats {
    pub edge_count: usize,
    pub total_length: f64,
    pub sum_log_length: f64,
    pub sum_log_sin: f64,
}

impl CachedStats {
    /// Equal up to `rel` relative error (absolute near zero).
    pub fn approx_eq(&self, o: &CachedStats, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()));
        self.edge_count == o.edge_count
            && close(self.total_length, o.total_length)
            && close(self.sum_log_length, o.sum_log_length)
            && close(self.sum_log_sin, o.sum_log_sin)
    }
}

/// A broken validity rule.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Degree { vertex: u32, expected: usize, found: usize },
    Crossing { a: u32, b: u32 },
    TooClose { a: u32, b: u32 },
    ShortEdge { edge: u32 },
    Placement { vertex: u32 },
    AnchorOnEdge { edge: u32 },
    SharpAngle { vertex: u32 },
    DanglingEdge { edge: u32 },
    IndexMismatch,
    StatsMismatch,
}

type PointKey = (u64, u64);

/// Id-independent snapshot used to compare colorings exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub anchor_color: Color,
    pub vertices: Vec<(PointKey, bool)>,
    pub edges: Vec<(PointKey, PointKey)>,
}

/// A two-coloring of the window encoded by its discontinuity graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Coloring {
    window: Rect,
    anchor: Point2,
    anchor_color: Color,
    vertices: Slab<Vertex>,
    edges: Slab<Edge>,
    interior: Vec<u32>,
    boundary: Vec<u32>,
    edge_ids: Vec<u32>,
    stats: CachedStats,
    index: EdgeGridIndex,
}

fn sorted_insert(v: &mut Vec<u32>, x: u32) {
    if let Err(p) = v.binary_search(&x) {
        v.insert(p, x);
    }
}

fn sorted_remove(v: &mut Vec<u32>, x: u32) {
    if let Ok(p) = v.binary_search(&x) {
        v.remove(p);
    }
}

pub(crate) fn safe_ln(x: f64) -> f64 {
    x.max(f64::MIN_POSITIVE).ln()
}

impl Coloring {
    /// Empty coloring: a single color everywhere, anchored at the window
    /// center.
    pub fn new(window: Rect, anchor_color: Color) -> Self {
        Self::with_index_cell(window, anchor_color, DEFAULT_INDEX_CELL).expect("default cell size is valid")
    }

    pub fn with_index_cell(window: Rect, anchor_color: Color, cell_size: f64) -> Result<Self> {
        let grid = GridSpec::new(window, cell_size)?;
        Ok(Coloring {
            window,
            anchor: window.center(),
            anchor_color,
            vertices: Slab::default(),
            edges: Slab::default(),
            interior: Vec::new(),
            boundary: Vec::new(),
            edge_ids: Vec::new(),
            stats: CachedStats::default(),
            index: EdgeGridIndex::new(grid),
        })
    }

    pub fn window(&self) -> &Rect {
        &self.window
    }

    pub fn anchor(&self) -> Point2 {
        self.anchor
    }

    pub fn anchor_color(&self) -> Color {
        self.anchor_color
    }

    pub fn set_anchor_color(&mut self, c: Color) {
        self.anchor_color = c;
    }

    pub fn stats(&self) -> &CachedStats {
        &self.stats
    }

    pub fn index(&self) -> &EdgeGridIndex {
        &self.index
    }

    pub fn vertex(&self, id: u32) -> Option<&Vertex> {
        self.vertices.get(id)
    }

    pub fn edge(&self, id: u32) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (u32, &Vertex)> {
        self.vertices.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, &Edge)> {
        self.edges.iter()
    }

    /// Sorted ids of interior vertices.
    pub fn interior_ids(&self) -> &[u32] {
        &self.interior
    }

    /// Sorted ids of boundary vertices.
    pub fn boundary_ids(&self) -> &[u32] {
        &self.boundary
    }

    /// Sorted edge ids.
    pub fn edge_ids(&self) -> &[u32] {
        &self.edge_ids
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn segment(&self, e: u32) -> Segment {
        let edge = self.edges.get(e).expect("edge id");
        Segment::new(self.pos(edge.v[0]), self.pos(edge.v[1]))
    }

    pub fn pos(&self, v: u32) -> Point2 {
        self.vertices.get(v).expect("vertex id").pos
    }

    /// Vertices joined to `v` by an edge, in incident-edge order.
    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        let vert = self.vertices.get(v).expect("vertex id");
        vert.edges.iter().map(|&e| self.edges.get(e).unwrap().other(v)).collect()
    }

    /// Edge joining `a` and `b`, if any.
    pub fn edge_between(&self, a: u32, b: u32) -> Option<u32> {
        let va = self.vertices.get(a)?;
        va.edges.iter().copied().find(|&e| self.edges.get(e).is_some_and(|ed| ed.other(a) == b))
    }

    /// Sine of the angle at a vertex: between its two edges for interior
    /// vertices, between its edge and the window side for boundary ones.
    /// Vertices with the wrong degree report 1.
    pub fn vertex_sin(&self, v: u32) -> f64 {
        let vert = self.vertices.get(v).expect("vertex id");
        if vert.edges.len() != vert.kind.degree() {
            return 1.0;
        }
        let dir = |e: u32| {
            let o = self.edges.get(e).unwrap().other(v);
            let d = self.pos(o) - vert.pos;
            d * (1.0 / d.norm())
        };
        match vert.kind {
            VertexKind::Interior => dir(vert.edges[0]).cross(dir(vert.edges[1])).abs(),
            VertexKind::Boundary => match self.window.boundary_side(vert.pos, EPS_GEOM) {
                Some(side) => Rect::sin_with_side(side, dir(vert.edges[0])),
                None => 0.0,
            },
        }
    }

    fn vertex_log_sin(&self, v: u32) -> f64 {
        safe_ln(self.vertex_sin(v))
    }

    /// Statistics recomputed from the graph.
    pub fn recompute_stats(&self) -> CachedStats {
        let mut s = CachedStats::default();
        for (id, _) in self.edges.iter() {
            let l = self.segment(id).length();
            s.edge_count += 1;
            s.total_length += l;
            s.sum_log_length += safe_ln(l);
        }
        for (id, _) in self.vertices.iter() {
            s.sum_log_sin += self.vertex_log_sin(id);
        }
        s
    }

    /// Replace the running sums by a fresh recomputation.
    pub fn refresh_stats(&mut self) {
        self.stats = self.recompute_stats();
    }

    /// Color at `q`. Points on an edge, or whose path from the anchor grazes
    /// a vertex, are nudged by a tiny offset first.
    pub fn color_at(&self, q: Point2) -> Color {
        let mut query = q;
        for attempt in 0..16 {
            if let Some(parity) = self.crossing_parity(self.anchor, query) {
                return self.anchor_color.flip_if(parity);
            }
            let k = attempt as f64 + 1.0;
            query = q + Point2::from_polar(EPS_GEOM * 10f64.powi(attempt.min(6)), 0.7 * k);
        }
        self.anchor_color.flip_if(self.crossing_parity_tolerant(self.anchor, query))
    }

    /// Color at `q` computed along a path through `via`. The parity is path
    /// independent, so this must agree with [`Coloring::color_at`].
    pub fn color_at_via(&self, q: Point2, via: Point2) -> Option<Color> {
        let a = self.crossing_parity(self.anchor, via)?;
        let b = self.crossing_parity(via, q)?;
        Some(self.anchor_color.flip_if(a ^ b))
    }

    /// Parity of edges crossed on the segment `p -> q`, or `None` when the
    /// path touches an edge or a vertex degenerately.
    pub fn crossing_parity(&self, p: Point2, q: Point2) -> Option<bool> {
        let path = Segment::new(p, q);
        let mut parity = false;
        for e in self.index.candidates(&path) {
            let s = self.segment(e);
            let d1 = (s.b - s.a).cross(p - s.a);
            let d2 = (s.b - s.a).cross(q - s.a);
            let d3 = (q - p).cross(s.a - p);
            let d4 = (q - p).cross(s.b - p);
            let straddle_path = (d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0);
            let straddle_edge = (d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0);
            if straddle_path && straddle_edge {
                parity = !parity;
                continue;
            }
            let touching = d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0;
            if touching && (segments_properly_intersect(&path, &s) || [p, q].contains(&s.a) || [p, q].contains(&s.b)) {
                return None;
            }
        }
        Some(parity)
    }

    fn crossing_parity_tolerant(&self, p: Point2, q: Point2) -> bool {
        let path = Segment::new(p, q);
        let mut parity = false;
        for e in self.index.candidates(&path) {
            if crate::geometry::segment_crossing_param(&path, &self.segment(e)).is_some() {
                parity = !parity;
            }
        }
        parity
    }

    /// Full validity check; empty when the coloring is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (id, v) in self.vertices.iter() {
            if v.edges.len() != v.kind.degree() {
                out.push(Violation::Degree {
                    vertex: id,
                    expected: v.kind.degree(),
                    found: v.edges.len(),
                });
            }
            if !self.placement_ok(v.pos, v.kind) {
                out.push(Violation::Placement { vertex: id });
            }
            if v.edges.len() == v.kind.degree() && self.vertex_sin(id) < MIN_SIN_ANGLE {
                out.push(Violation::SharpAngle { vertex: id });
            }
        }
        let ids: Vec<u32> = self.edges.iter().map(|(i, _)| i).collect();
        for (id, e) in self.edges.iter() {
            if !self.vertices.contains(e.v[0]) || !self.vertices.contains(e.v[1]) {
                out.push(Violation::DanglingEdge { edge: id });
            }
        }
        if !out.iter().any(|v| matches!(v, Violation::DanglingEdge { .. })) {
            for &id in &ids {
                let s = self.segment(id);
                if s.length() <= EPS_GEOM {
                    out.push(Violation::ShortEdge { edge: id });
                }
                if s.distance_to_point(self.anchor) <= EPS_GEOM {
                    out.push(Violation::AnchorOnEdge { edge: id });
                }
            }
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    if let Some(v) = self.pair_violation(a, b) {
                        out.push(v);
                    }
                }
            }
        }
        let mut rebuilt = EdgeGridIndex::new(*self.index.grid());
        for (id, _) in self.edges.iter() {
            if self.vertices.contains(self.edges.get(id).unwrap().v[0])
                && self.vertices.contains(self.edges.get(id).unwrap().v[1])
            {
                rebuilt.insert(id, self.segment(id));
            }
        }
        if rebuilt != self.index {
            out.push(Violation::IndexMismatch);
        }
        if !self.stats.approx_eq(&self.recompute_stats(), 1e-9) {
            out.push(Violation::StatsMismatch);
        }
        out
    }

    fn placement_ok(&self, p: Point2, kind: VertexKind) -> bool {
        match kind {
            VertexKind::Interior => self.window.contains_strictly(p, EPS_GEOM),
            VertexKind::Boundary => self.window.boundary_side(p, EPS_GEOM).is_some(),
        }
    }

    fn pair_violation(&self, a: u32, b: u32) -> Option<Violation> {
        let (ea, eb) = (self.edges.get(a).unwrap(), self.edges.get(b).unwrap());
        let (sa, sb) = (self.segment(a), self.segment(b));
        let adjacent = ea.v.iter().any(|v| eb.v.contains(v));
        if adjacent {
            if segments_properly_intersect(&sa, &sb) {
                return Some(Violation::Crossing { a, b });
            }
            return None;
        }
        if segments_properly_intersect(&sa, &sb) {
            Some(Violation::Crossing { a, b })
        } else if segment_distance(&sa, &sb) <= EPS_GEOM {
            Some(Violation::TooClose { a, b })
        } else {
            None
        }
    }

    // Raw graph mutation used by edits and import.

    fn raw_add_vertex(&mut self, id: Option<u32>, v: Vertex) -> u32 {
        let kind = v.kind;
        let id = match id {
            Some(id) => {
                self.vertices.insert_at(id, v);
                id
            }
            None => self.vertices.insert(v),
        };
        match kind {
            VertexKind::Interior => sorted_insert(&mut self.interior, id),
            VertexKind::Boundary => sorted_insert(&mut self.boundary, id),
        }
        id
    }

    fn raw_remove_vertex(&mut self, id: u32) -> Option<Vertex> {
        let v = self.vertices.remove(id)?;
        match v.kind {
            VertexKind::Interior => sorted_remove(&mut self.interior, id),
            VertexKind::Boundary => sorted_remove(&mut self.boundary, id),
        }
        Some(v)
    }

    fn raw_add_edge(&mut self, id: Option<u32>, e: Edge) -> u32 {
        let id = match id {
            Some(id) => {
                self.edges.insert_at(id, e);
                id
            }
            None => self.edges.insert(e),
        };
        for v in e.v {
            sorted_insert(&mut self.vertices.get_mut(v).expect("edge endpoint").edges, id);
        }
        sorted_insert(&mut self.edge_ids, id);
        let seg = self.segment(id);
        self.index.insert(id, seg);
        id
    }

    fn raw_remove_edge(&mut self, id: u32) -> Option<Edge> {
        let e = self.edges.remove(id)?;
        for v in e.v {
            if let Some(vert) = self.vertices.get_mut(v) {
                sorted_remove(&mut vert.edges, id);
            }
        }
        sorted_remove(&mut self.edge_ids, id);
        self.index.remove(id);
        Some(e)
    }

    /// Build a coloring from explicit vertices and edges, keeping their ids.
    pub fn from_parts(
        window: Rect,
        anchor_color: Color,
        cell_size: f64,
        vertices: impl IntoIterator<Item = (u32, Point2, VertexKind)>,
        edges: impl IntoIterator<Item = (u32, [u32; 2])>,
    ) -> Result<Self> {
        let mut c = Coloring::with_index_cell(window, anchor_color, cell_size)?;
        for (id, pos, kind) in vertices {
            if c.vertices.contains(id) {
                return Err(Error::InvalidGeometry(format!("duplicate vertex id {id}")));
            }
            c.raw_add_vertex(
                Some(id),
                Vertex {
                    pos,
                    kind,
                    edges: Vec::new(),
                },
            );
        }
        for (id, v) in edges {
            if c.edges.contains(id) {
                return Err(Error::InvalidGeometry(format!("duplicate edge id {id}")));
            }
            for x in v {
                if !c.vertices.contains(x) {
                    return Err(Error::MissingElement(format!("vertex {x} of edge {id}")));
                }
            }
            if v[0] == v[1] {
                return Err(Error::InvalidGeometry(format!("edge {id} is a loop")));
            }
            c.raw_add_edge(Some(id), Edge { v });
        }
        c.refresh_stats();
        let violations = c.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidGeometry(format!("{violations:?}")));
        }
        Ok(c)
    }

    /// Convenience builder for a coloring made of closed polygons, given as
    /// counter-clockwise or clockwise vertex rings strictly inside the window.
    pub fn from_polygons(window: Rect, anchor_color: Color, cell_size: f64, rings: &[Vec<Point2>]) -> Result<Self> {
        let mut verts = Vec::new();
        let mut edges = Vec::new();
        for ring in rings {
            let base = verts.len() as u32;
            for (k, p) in ring.iter().enumerate() {
                verts.push((base + k as u32, *p, VertexKind::Interior));
            }
            for k in 0..ring.len() {
                let a = base + k as u32;
                let b = base + ((k + 1) % ring.len()) as u32;
                edges.push((edges.len() as u32, [a, b]));
            }
        }
        Coloring::from_parts(window, anchor_color, cell_size, verts, edges)
    }

    /// Id-free description of the coloring: anchor color, sorted vertices
    /// and sorted edges given by their endpoint coordinates (as raw bits).
    pub fn canonical_form(&self) -> CanonicalForm {
        let key = |p: Point2| (p.x.to_bits(), p.y.to_bits());
        let mut vertices: Vec<_> = self.vertices().map(|(_, v)| (key(v.pos), v.kind == VertexKind::Boundary)).collect();
        vertices.sort_unstable();
        let mut edges: Vec<_> = self
            .edges()
            .map(|(_, e)| {
                let (a, b) = (key(self.pos(e.v[0])), key(self.pos(e.v[1])));
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        CanonicalForm {
            anchor_color: self.anchor_color,
            vertices,
            edges,
        }
    }

    /// Counts of the removable components (triangles, wedges, chords).
    pub fn components(&self) -> Components {
        components::scan(self)
    }
}
