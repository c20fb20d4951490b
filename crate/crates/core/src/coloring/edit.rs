use std::collections::BTreeSet;

use super::{safe_ln, CachedStats, Coloring, Edge, Vertex, VertexKind, Violation, MIN_SIN_ANGLE};
use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Point2, Segment, EPS_GEOM};

/// A vertex referenced by an edit: an existing id or the n-th added vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VRef {
    Old(u32),
    New(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewVertex {
    pub pos: Point2,
    pub kind: VertexKind,
}

/// A local change to the discontinuity graph.
///
/// Removals happen first, then additions. `region` is a closed polygon
/// (even-odd rule) covering exactly the points whose color the edit flips.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Edit {
    pub remove_edges: Vec<u32>,
    pub remove_vertices: Vec<u32>,
    pub add_vertices: Vec<NewVertex>,
    pub add_edges: Vec<[VRef; 2]>,
    pub region: Vec<Point2>,
}

/// Change in the cached statistics caused by an edit.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StatsDelta {
    pub edge_count: isize,
    pub total_length: f64,
    pub sum_log_length: f64,
    pub sum_log_sin: f64,
}

/// Everything needed to undo an applied edit exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct RevertToken {
    removed_vertices: Vec<(u32, Vertex)>,
    removed_edges: Vec<(u32, Edge)>,
    added_vertices: Vec<u32>,
    added_edges: Vec<u32>,
    stats: CachedStats,
    anchor_flipped: bool,
}

/// Result of applying an edit.
#[derive(Clone, Debug, PartialEq)]
pub struct AppliedEdit {
    /// Removed edges with their geometry before the edit.
    pub removed: Vec<(u32, Segment)>,
    /// Added edges with the ids they received.
    pub added: Vec<(u32, Segment)>,
    pub new_vertices: Vec<u32>,
    /// Vertices present after the edit whose incident geometry changed.
    pub touched: Vec<u32>,
    pub anchor_flipped: bool,
    pub delta: StatsDelta,
    pub region: Vec<Point2>,
    pub token: RevertToken,
}

impl Coloring {
    fn check_references(&self, edit: &Edit) -> Result<()> {
        let removed_e: BTreeSet<u32> = edit.remove_edges.iter().copied().collect();
        let removed_v: BTreeSet<u32> = edit.remove_vertices.iter().copied().collect();
        if removed_e.len() != edit.remove_edges.len() || removed_v.len() != edit.remove_vertices.len() {
            return Err(Error::MissingElement("duplicate id in removal list".into()));
        }
        for &e in &edit.remove_edges {
            if !self.edges.contains(e) {
                return Err(Error::MissingElement(format!("edge {e}")));
            }
        }
        for &v in &edit.remove_vertices {
            let vert = self.vertices.get(v).ok_or_else(|| Error::MissingElement(format!("vertex {v}")))?;
            if let Some(e) = vert.edges.iter().find(|e| !removed_e.contains(e)) {
                return Err(Error::MissingElement(format!("edge {e} would dangle from removed vertex {v}")));
            }
        }
        for pair in &edit.add_edges {
            for r in pair {
                match *r {
                    VRef::Old(v) if !self.vertices.contains(v) || removed_v.contains(&v) => {
                        return Err(Error::MissingElement(format!("vertex {v}")));
                    }
                    VRef::New(i) if i >= edit.add_vertices.len() => {
                        return Err(Error::MissingElement(format!("new vertex #{i}")));
                    }
                    _ => {}
                }
            }
            if pair[0] == pair[1] {
                return Err(Error::InvalidGeometry("edge joins a vertex to itself".into()));
            }
        }
        Ok(())
    }

    /// Apply `edit`, updating the graph, anchor color, statistics and index
    /// incrementally. Fails without touching the state if the edit refers to
    /// ids that do not exist. Geometric validity is not checked; see
    /// [`Coloring::apply_checked`].
    pub fn apply_edit(&mut self, edit: &Edit) -> Result<AppliedEdit> {
        self.check_references(edit)?;
        let old_stats = self.stats;

        let mut touched: BTreeSet<u32> = BTreeSet::new();
        for &e in &edit.remove_edges {
            touched.extend(self.edges.get(e).unwrap().v);
        }
        for pair in &edit.add_edges {
            for r in pair {
                if let VRef::Old(v) = r {
                    touched.insert(*v);
                }
            }
        }
        let sin_before: f64 = touched.iter().map(|&v| self.vertex_log_sin(v)).sum();

        let mut delta = StatsDelta::default();
        let mut removed = Vec::with_capacity(edit.remove_edges.len());
        let mut removed_edges = Vec::with_capacity(edit.remove_edges.len());
        for &e in &edit.remove_edges {
            let seg = self.segment(e);
            let l = seg.length();
            delta.edge_count -= 1;
            delta.total_length -= l;
            delta.sum_log_length -= safe_ln(l);
            removed.push((e, seg));
            removed_edges.push((e, self.raw_remove_edge(e).unwrap()));
        }
        let mut removed_vertices = Vec::with_capacity(edit.remove_vertices.len());
        for &v in &edit.remove_vertices {
            touched.remove(&v);
            removed_vertices.push((v, self.raw_remove_vertex(v).unwrap()));
        }
        let mut new_vertices = Vec::with_capacity(edit.add_vertices.len());
        for nv in &edit.add_vertices {
            let id = self.raw_add_vertex(
                None,
                Vertex {
                    pos: nv.pos,
                    kind: nv.kind,
                    edges: Vec::new(),
                },
            );
            new_vertices.push(id);
            touched.insert(id);
        }
        let resolve = |r: VRef| match r {
            VRef::Old(v) => v,
            VRef::New(i) => new_vertices[i],
        };
        let mut added = Vec::with_capacity(edit.add_edges.len());
        for pair in &edit.add_edges {
            let v = [resolve(pair[0]), resolve(pair[1])];
            let id = self.raw_add_edge(None, Edge { v });
            let seg = self.segment(id);
            let l = seg.length();
            delta.edge_count += 1;
            delta.total_length += l;
            delta.sum_log_length += safe_ln(l);
            added.push((id, seg));
        }
        let sin_after: f64 = touched.iter().map(|&v| self.vertex_log_sin(v)).sum();
        delta.sum_log_sin = sin_after - sin_before;

        let anchor_flipped = edit.region.len() >= 3 && point_in_polygon(self.anchor, &edit.region);
        if anchor_flipped {
            self.anchor_color = self.anchor_color.flipped();
        }
        self.stats = CachedStats {
            edge_count: (old_stats.edge_count as isize + delta.edge_count) as usize,
            total_length: old_stats.total_length + delta.total_length,
            sum_log_length: old_stats.sum_log_length + delta.sum_log_length,
            sum_log_sin: old_stats.sum_log_sin + delta.sum_log_sin,
        };
        let token = RevertToken {
            removed_vertices,
            removed_edges,
            added_vertices: new_vertices.clone(),
            added_edges: added.iter().map(|(id, _)| *id).collect(),
            stats: old_stats,
            anchor_flipped,
        };
        Ok(AppliedEdit {
            removed,
            added,
            new_vertices,
            touched: touched.into_iter().collect(),
            anchor_flipped,
            delta,
            region: edit.region.clone(),
            token,
        })
    }

    /// Undo an applied edit. The coloring returns to exactly its prior state.
    pub fn revert(&mut self, token: RevertToken) {
        for &e in token.added_edges.iter().rev() {
            self.raw_remove_edge(e);
        }
        for &v in token.added_vertices.iter().rev() {
            self.raw_remove_vertex(v);
        }
        for (id, v) in token.removed_vertices.into_iter().rev() {
            self.raw_add_vertex(Some(id), v);
        }
        for (id, e) in token.removed_edges.into_iter().rev() {
            self.raw_add_edge(Some(id), e);
        }
        if token.anchor_flipped {
            self.anchor_color = self.anchor_color.flipped();
        }
        self.stats = token.stats;
    }

    /// Validity of the part of the coloring an applied edit touched, assuming
    /// the rest was valid before.
    pub fn check_applied(&self, applied: &AppliedEdit) -> Option<Violation> {
        for &v in &applied.new_vertices {
            let vert = self.vertices.get(v).unwrap();
            if !self.placement_ok(vert.pos, vert.kind) {
                return Some(Violation::Placement { vertex: v });
            }
        }
        for &v in &applied.touched {
            let Some(vert) = self.vertices.get(v) else { continue };
            if vert.edges.len() != vert.kind.degree() {
                return Some(Violation::Degree {
                    vertex: v,
                    expected: vert.kind.degree(),
                    found: vert.edges.len(),
                });
            }
            if self.vertex_sin(v) < MIN_SIN_ANGLE {
                return Some(Violation::SharpAngle { vertex: v });
            }
        }
        for (id, seg) in &applied.added {
            if seg.length() <= EPS_GEOM {
                return Some(Violation::ShortEdge { edge: *id });
            }
            if seg.distance_to_point(self.anchor) <= EPS_GEOM {
                return Some(Violation::AnchorOnEdge { edge: *id });
            }
            for other in self.index.candidates(seg) {
                if other == *id {
                    continue;
                }
                if let Some(v) = self.pair_violation(*id, other) {
                    return Some(v);
                }
            }
        }
        None
    }

    /// Apply an edit and keep it only if the result is valid. On an invalid
    /// result the state is restored and the violation returned.
    pub fn apply_checked(&mut self, edit: &Edit) -> Result<std::result::Result<AppliedEdit, Violation>> {
        let applied = self.apply_edit(edit)?;
        match self.check_applied(&applied) {
            None => Ok(Ok(applied)),
            Some(v) => {
                self.revert(applied.token);
                Ok(Err(v))
            }
        }
    }
}
