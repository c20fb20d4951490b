//! The proposal moves.
//!
//! Every move is split into two stages: [`draw_choice`] makes all random
//! draws, and [`build`] turns a choice into an edit together with exact
//! forward and reverse log proposal densities. [`inverse_choice`] gives the
//! choice that undoes an applied move, which lets the test suite check
//! reversibility move by move.

use rand::Rng;

use super::{MoveKind, MoveWeights};
use crate::coloring::{AppliedEdit, Coloring, Edit, NewVertex, VRef, VertexKind};
use crate::geometry::{polygon_signed_area, Point2, Rect, Segment};

/// All random decisions of one proposal.
#[derive(Clone, Debug, PartialEq)]
pub enum MoveChoice {
    TriangleBirth { pts: [Point2; 3] },
    TriangleDeath { triangle: [u32; 3] },
    WedgeBirth { ends: [Point2; 2], apex: Point2 },
    WedgeDeath { vertex: u32 },
    ChordBirth { ends: [Point2; 2] },
    ChordDeath { edge: u32 },
    KinkBirth { edge: u32, pos: Point2 },
    KinkDeath { vertex: u32 },
    Relocate { vertex: u32, pos: Point2 },
    BoundarySlide { vertex: u32, pos: Point2 },
    SlideAlongEdge { vertex: u32, edge: u32, pos: Point2 },
    Recolor { edges: [u32; 2], pairing: u8, local: bool },
}

impl MoveChoice {
    pub fn kind(&self) -> MoveKind {
        match self {
            MoveChoice::TriangleBirth { .. } => MoveKind::TriangleBirth,
            MoveChoice::TriangleDeath { .. } => MoveKind::TriangleDeath,
            MoveChoice::WedgeBirth { .. } => MoveKind::WedgeBirth,
            MoveChoice::WedgeDeath { .. } => MoveKind::WedgeDeath,
            MoveChoice::ChordBirth { .. } => MoveKind::ChordBirth,
            MoveChoice::ChordDeath { .. } => MoveKind::ChordDeath,
            MoveChoice::KinkBirth { .. } => MoveKind::KinkBirth,
            MoveChoice::KinkDeath { .. } => MoveKind::KinkDeath,
            MoveChoice::Relocate { .. } => MoveKind::Relocate,
            MoveChoice::BoundarySlide { .. } => MoveKind::BoundarySlide,
            MoveChoice::SlideAlongEdge { .. } => MoveKind::SlideAlongEdge,
            MoveChoice::Recolor { local: false, .. } => MoveKind::RecolorQuad,
            MoveChoice::Recolor { local: true, .. } => MoveKind::LocalRecolor,
        }
    }
}

/// Why a proposal was rejected before any density was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// Nothing of the required kind exists in the current state.
    NothingToChange,
    /// The choice does not describe a move from this state.
    Infeasible,
    /// The reverse move could not propose the current state.
    Irreversible,
    /// The resulting coloring breaks a validity rule.
    Invalid,
}

/// A fully specified proposal.
#[derive(Clone, Debug, PartialEq)]
pub struct MoveProposal {
    pub kind: MoveKind,
    pub choice: MoveChoice,
    pub edit: Edit,
    pub log_forward: f64,
    pub log_reverse: f64,
}

/// Move parameters that shape the proposal densities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveParams<'a> {
    pub weights: &'a MoveWeights,
    /// Relocation radius, boundary slide half-width and kink half-width.
    pub delta: f64,
}

fn uniform_in(rect: &Rect, rng: &mut impl Rng) -> Point2 {
    Point2::new(
        rng.random_range(rect.min.x..rect.max.x),
        rng.random_range(rect.min.y..rect.max.y),
    )
}

fn pick<T: Copy>(items: &[T], rng: &mut impl Rng) -> Option<T> {
    if items.is_empty() {
        None
    } else {
        Some(items[rng.random_range(0..items.len())])
    }
}

/// Unit normal to `e`, counter-clockwise.
fn unit_normal(e: Point2) -> Point2 {
    e.perp() * (1.0 / e.norm())
}

/// Make all random draws for a move of `kind`.
pub fn draw_choice(kind: MoveKind, c: &Coloring, mp: &MoveParams, rng: &mut impl Rng) -> Result<MoveChoice, RejectReason> {
    let w = *c.window();
    let per = w.perimeter();
    use MoveKind as K;
    Ok(match kind {
        K::TriangleBirth => MoveChoice::TriangleBirth {
            pts: [uniform_in(&w, rng), uniform_in(&w, rng), uniform_in(&w, rng)],
        },
        K::TriangleDeath => {
            let comps = c.components();
            let triangle = pick(&comps.triangles, rng).ok_or(RejectReason::NothingToChange)?;
            MoveChoice::TriangleDeath { triangle }
        }
        K::WedgeBirth => MoveChoice::WedgeBirth {
            ends: [
                w.perimeter_point(rng.random_range(0.0..per)),
                w.perimeter_point(rng.random_range(0.0..per)),
            ],
            apex: uniform_in(&w, rng),
        },
        K::WedgeDeath => {
            let comps = c.components();
            MoveChoice::WedgeDeath {
                vertex: pick(&comps.wedges, rng).ok_or(RejectReason::NothingToChange)?,
            }
        }
        K::ChordBirth => MoveChoice::ChordBirth {
            ends: [
                w.perimeter_point(rng.random_range(0.0..per)),
                w.perimeter_point(rng.random_range(0.0..per)),
            ],
        },
        K::ChordDeath => {
            let comps = c.components();
            MoveChoice::ChordDeath {
                edge: pick(&comps.chords, rng).ok_or(RejectReason::NothingToChange)?,
            }
        }
        K::KinkBirth => {
            let edge = pick(c.edge_ids(), rng).ok_or(RejectReason::NothingToChange)?;
            let s = c.segment(edge);
            let along = rng.random_range(0.0..1.0);
            let across = rng.random_range(-mp.delta..mp.delta);
            MoveChoice::KinkBirth {
                edge,
                pos: s.a.lerp(s.b, along) + unit_normal(s.dir()) * across,
            }
        }
        K::KinkDeath => MoveChoice::KinkDeath {
            vertex: pick(c.interior_ids(), rng).ok_or(RejectReason::NothingToChange)?,
        },
        K::Relocate => {
            let vertex = pick(c.interior_ids(), rng).ok_or(RejectReason::NothingToChange)?;
            let r = mp.delta * rng.random::<f64>().sqrt();
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            MoveChoice::Relocate {
                vertex,
                pos: c.pos(vertex) + Point2::from_polar(r, th),
            }
        }
        K::BoundarySlide => {
            let vertex = pick(c.boundary_ids(), rng).ok_or(RejectReason::NothingToChange)?;
            let s = w.perimeter_coord(c.pos(vertex)) + rng.random_range(-mp.delta..mp.delta);
            MoveChoice::BoundarySlide {
                vertex,
                pos: w.perimeter_point(s),
            }
        }
        K::SlideAlongEdge => {
            let vertex = pick(c.interior_ids(), rng).ok_or(RejectReason::NothingToChange)?;
            let v = c.vertex(vertex).unwrap();
            let edge = v.edges[rng.random_range(0..v.edges.len())];
            let u = c.edge(edge).unwrap().other(vertex);
            let lambda = rng.random_range(-0.5..1.0);
            let p = c.pos(vertex);
            MoveChoice::SlideAlongEdge {
                vertex,
                edge,
                pos: p + (c.pos(u) - p) * lambda,
            }
        }
        K::RecolorQuad => {
            let ids = c.edge_ids();
            if ids.len() < 2 {
                return Err(RejectReason::NothingToChange);
            }
            let i = rng.random_range(0..ids.len());
            let mut j = rng.random_range(0..ids.len() - 1);
            if j >= i {
                j += 1;
            }
            MoveChoice::Recolor {
                edges: [ids[i], ids[j]],
                pairing: rng.random_range(0..2),
                local: false,
            }
        }
        K::LocalRecolor => {
            let e1 = pick(c.edge_ids(), rng).ok_or(RejectReason::NothingToChange)?;
            let near = c.index().co_occurring(e1);
            let e2 = pick(&near, rng).ok_or(RejectReason::NothingToChange)?;
            MoveChoice::Recolor {
                edges: [e1, e2],
                pairing: rng.random_range(0..2),
                local: true,
            }
        }
    })
}

/// Closed region bounded by `path` (which starts and ends on the window
/// boundary) and the boundary arc joining its ends, taking whichever of the
/// two arcs encloses the smaller area.
fn smaller_side(w: &Rect, path: &[Point2]) -> Vec<Point2> {
    let s_end = w.perimeter_coord(*path.last().unwrap());
    let s_start = w.perimeter_coord(path[0]);
    let close = |ccw: bool| {
        let mut poly = path.to_vec();
        poly.extend(w.corners_between(s_end, s_start, ccw));
        poly
    };
    let (a, b) = (close(true), close(false));
    if polygon_signed_area(&a).abs() <= polygon_signed_area(&b).abs() {
        a
    } else {
        b
    }
}

fn kink_rect_contains(a: Point2, b: Point2, p: Point2, half_width: f64) -> bool {
    let e = b - a;
    let l2 = e.norm_sq();
    let t = (p - a).dot(e) / l2;
    let off = e.cross(p - a).abs() / l2.sqrt();
    (0.0..=1.0).contains(&t) && off <= half_width
}

/// Edges that would share an index cell with `f` after replacing `gone`
/// by `f` and `partner`.
fn co_occurring_after(c: &Coloring, f: &Segment, partner: &Segment, gone: [u32; 2]) -> (usize, bool) {
    let grid = c.index().grid();
    let cells = grid.trace_segment(f);
    let mut n = c.index().edges_in_cells(cells.iter().copied()).into_iter().filter(|e| !gone.contains(e)).count();
    let partner_cells = grid.trace_segment(partner);
    let meets = cells.iter().any(|x| partner_cells.contains(x));
    if meets {
        n += 1;
    }
    (n, meets)
}

/// Turn a choice into an edit with its proposal densities.
pub fn build(c: &Coloring, mp: &MoveParams, choice: &MoveChoice) -> Result<MoveProposal, RejectReason> {
    let w = *c.window();
    let (area, per) = (w.area(), w.perimeter());
    let kind = choice.kind();
    let lw = |k: MoveKind| mp.weights.get(k).ln();
    let ln2 = std::f64::consts::LN_2;
    let n_int = c.interior_ids().len() as f64;
    let n_edges = c.edge_count() as f64;
    let (edit, log_forward, log_reverse) = match *choice {
        MoveChoice::TriangleBirth { pts } => {
            let t = c.components().triangles.len() as f64;
            let edit = Edit {
                add_vertices: pts
                    .iter()
                    .map(|&pos| NewVertex {
                        pos,
                        kind: VertexKind::Interior,
                    })
                    .collect(),
                add_edges: vec![
                    [VRef::New(0), VRef::New(1)],
                    [VRef::New(1), VRef::New(2)],
                    [VRef::New(2), VRef::New(0)],
                ],
                region: pts.to_vec(),
                ..Edit::default()
            };
            (
                edit,
                lw(kind) + 6f64.ln() - 3.0 * area.ln(),
                lw(kind.inverse()) - (t + 1.0).ln(),
            )
        }
        MoveChoice::TriangleDeath { triangle } => {
            let comps = c.components();
            if !comps.triangles.contains(&triangle) {
                return Err(RejectReason::Infeasible);
            }
            let mut edges: Vec<u32> = triangle.iter().flat_map(|&v| c.vertex(v).unwrap().edges.clone()).collect();
            edges.sort_unstable();
            edges.dedup();
            let edit = Edit {
                remove_edges: edges,
                remove_vertices: triangle.to_vec(),
                region: triangle.iter().map(|&v| c.pos(v)).collect(),
                ..Edit::default()
            };
            (
                edit,
                lw(kind) - (comps.triangles.len() as f64).ln(),
                lw(kind.inverse()) + 6f64.ln() - 3.0 * area.ln(),
            )
        }
        MoveChoice::WedgeBirth { ends, apex } => {
            let n = c.components().wedges.len() as f64;
            let edit = Edit {
                add_vertices: vec![
                    NewVertex {
                        pos: ends[0],
                        kind: VertexKind::Boundary,
                    },
                    NewVertex {
                        pos: apex,
                        kind: VertexKind::Interior,
                    },
                    NewVertex {
                        pos: ends[1],
                        kind: VertexKind::Boundary,
                    },
                ],
                add_edges: vec![[VRef::New(0), VRef::New(1)], [VRef::New(1), VRef::New(2)]],
                region: smaller_side(&w, &[ends[0], apex, ends[1]]),
                ..Edit::default()
            };
            (
                edit,
                lw(kind) + ln2 - 2.0 * per.ln() - area.ln(),
                lw(kind.inverse()) - (n + 1.0).ln(),
            )
        }
        MoveChoice::WedgeDeath { vertex } => {
            let comps = c.components();
            if !comps.wedges.contains(&vertex) {
                return Err(RejectReason::Infeasible);
            }
            let nb = c.neighbors(vertex);
            let edit = Edit {
                remove_edges: c.vertex(vertex).unwrap().edges.clone(),
                remove_vertices: vec![nb[0], vertex, nb[1]],
                region: smaller_side(&w, &[c.pos(nb[0]), c.pos(vertex), c.pos(nb[1])]),
                ..Edit::default()
            };
            (
                edit,
                lw(kind) - (comps.wedges.len() as f64).ln(),
                lw(kind.inverse()) + ln2 - 2.0 * per.ln() - area.ln(),
            )
        }
        MoveChoice::ChordBirth { ends } => {
            let n = c.components().chords.len() as f64;
            let edit = Edit {
                add_vertices: ends
                    .iter()
                    .map(|&pos| NewVertex {
                        pos,
                        kind: VertexKind::Boundary,
                    })
                    .collect(),
                add_edges: vec![[VRef::New(0), VRef::New(1)]],
                region: smaller_side(&w, &ends),
                ..Edit::default()
            };
            (edit, lw(kind) + ln2 - 2.0 * per.ln(), lw(kind.inverse()) - (n + 1.0).ln())
        }
        MoveChoice::ChordDeath { edge } => {
            let comps = c.components();
            if !comps.chords.contains(&edge) {
                return Err(RejectReason::Infeasible);
            }
            let e = *c.edge(edge).unwrap();
            let edit = Edit {
                remove_edges: vec![edge],
                remove_vertices: e.v.to_vec(),
                region: smaller_side(&w, &[c.pos(e.v[0]), c.pos(e.v[1])]),
                ..Edit::default()
            };
            (
                edit,
                lw(kind) - (comps.chords.len() as f64).ln(),
                lw(kind.inverse()) + ln2 - 2.0 * per.ln(),
            )
        }
        MoveChoice::KinkBirth { edge, pos } => {
            let e = *c.edge(edge).ok_or(RejectReason::Infeasible)?;
            let (a, b) = (c.pos(e.v[0]), c.pos(e.v[1]));
            if !kink_rect_contains(a, b, pos, mp.delta) {
                return Err(RejectReason::Infeasible);
            }
            let edit = Edit {
                remove_edges: vec![edge],
                add_vertices: vec![NewVertex {
                    pos,
                    kind: VertexKind::Interior,
                }],
                add_edges: vec![[VRef::Old(e.v[0]), VRef::New(0)], [VRef::New(0), VRef::Old(e.v[1])]],
                region: vec![a, pos, b],
                ..Edit::default()
            };
            (
                edit,
                lw(kind) - n_edges.ln() - (2.0 * mp.delta * a.dist(b)).ln(),
                lw(kind.inverse()) - (n_int + 1.0).ln(),
            )
        }
        MoveChoice::KinkDeath { vertex } => {
            let v = c.vertex(vertex).ok_or(RejectReason::Infeasible)?;
            if v.kind != VertexKind::Interior {
                return Err(RejectReason::Infeasible);
            }
            let nb = c.neighbors(vertex);
            let (ia, ib) = (nb[0], nb[1]);
            if ia == ib || c.edge_between(ia, ib).is_some() {
                return Err(RejectReason::Infeasible);
            }
            let (a, b, p) = (c.pos(ia), c.pos(ib), v.pos);
            if !kink_rect_contains(a, b, p, mp.delta) {
                return Err(RejectReason::Irreversible);
            }
            let edit = Edit {
                remove_edges: v.edges.clone(),
                remove_vertices: vec![vertex],
                add_edges: vec![[VRef::Old(ia), VRef::Old(ib)]],
                region: vec![a, p, b],
                ..Edit::default()
            };
            (
                edit,
                lw(kind) - n_int.ln(),
                lw(kind.inverse()) - (n_edges - 1.0).ln() - (2.0 * mp.delta * a.dist(b)).ln(),
            )
        }
        MoveChoice::Relocate { vertex, pos } => {
            let v = c.vertex(vertex).ok_or(RejectReason::Infeasible)?;
            if v.kind != VertexKind::Interior || v.pos.dist(pos) > mp.delta {
                return Err(RejectReason::Infeasible);
            }
            let nb = c.neighbors(vertex);
            let edit = Edit {
                remove_edges: v.edges.clone(),
                remove_vertices: vec![vertex],
                add_vertices: vec![NewVertex {
                    pos,
                    kind: VertexKind::Interior,
                }],
                add_edges: vec![[VRef::Old(nb[0]), VRef::New(0)], [VRef::New(0), VRef::Old(nb[1])]],
                region: vec![c.pos(nb[0]), v.pos, c.pos(nb[1]), pos],
                ..Edit::default()
            };
            let d = lw(kind) - n_int.ln() - (std::f64::consts::PI * mp.delta * mp.delta).ln();
            (edit, d, d)
        }
        MoveChoice::BoundarySlide { vertex, pos } => {
            let v = c.vertex(vertex).ok_or(RejectReason::Infeasible)?;
            if v.kind != VertexKind::Boundary {
                return Err(RejectReason::Infeasible);
            }
            let (s0, s1) = (w.perimeter_coord(v.pos), w.perimeter_coord(pos));
            let mut ds = (s1 - s0).rem_euclid(per);
            if ds > per / 2.0 {
                ds -= per;
            }
            if ds.abs() > mp.delta || w.perimeter_point(s1).dist(pos) > 1e-9 {
                return Err(RejectReason::Infeasible);
            }
            let n = c.neighbors(vertex)[0];
            let mut region = vec![c.pos(n), v.pos];
            region.extend(w.corners_between(s0, s1, ds > 0.0));
            region.push(pos);
            let edit = Edit {
                remove_edges: v.edges.clone(),
                remove_vertices: vec![vertex],
                add_vertices: vec![NewVertex {
                    pos,
                    kind: VertexKind::Boundary,
                }],
                add_edges: vec![[VRef::Old(n), VRef::New(0)]],
                region,
                ..Edit::default()
            };
            let d = lw(kind) - (c.boundary_ids().len() as f64).ln() - (2.0 * mp.delta).ln();
            (edit, d, d)
        }
        MoveChoice::SlideAlongEdge { vertex, edge, pos } => {
            let v = c.vertex(vertex).ok_or(RejectReason::Infeasible)?;
            if v.kind != VertexKind::Interior || !v.edges.contains(&edge) {
                return Err(RejectReason::Infeasible);
            }
            let iu = c.edge(edge).unwrap().other(vertex);
            let other_edge = if v.edges[0] == edge { v.edges[1] } else { v.edges[0] };
            let iw = c.edge(other_edge).unwrap().other(vertex);
            let u = c.pos(iu);
            let e = u - v.pos;
            let lambda = (pos - v.pos).dot(e) / e.norm_sq();
            let off = e.cross(pos - v.pos).abs() / e.norm();
            if !(-0.5..=1.0).contains(&lambda) || off > 1e-9 * (1.0 + e.norm()) {
                return Err(RejectReason::Infeasible);
            }
            let e2 = u - pos;
            let lambda_back = (v.pos - pos).dot(e2) / e2.norm_sq();
            if !(-0.5..=1.0).contains(&lambda_back) {
                return Err(RejectReason::Irreversible);
            }
            let edit = Edit {
                remove_edges: v.edges.clone(),
                remove_vertices: vec![vertex],
                add_vertices: vec![NewVertex {
                    pos,
                    kind: VertexKind::Interior,
                }],
                add_edges: vec![[VRef::Old(iw), VRef::New(0)], [VRef::New(0), VRef::Old(iu)]],
                region: vec![c.pos(iw), v.pos, pos],
                ..Edit::default()
            };
            let d = lw(kind) - n_int.ln() - ln2 + (2.0f64 / 3.0).ln();
            (edit, d, d)
        }
        MoveChoice::Recolor { edges, pairing, local } => {
            let (Some(e1), Some(e2)) = (c.edge(edges[0]), c.edge(edges[1])) else {
                return Err(RejectReason::Infeasible);
            };
            if edges[0] == edges[1] || pairing > 1 {
                return Err(RejectReason::Infeasible);
            }
            let [a, b] = e1.v;
            let [cc, d] = e2.v;
            if a == cc || a == d || b == cc || b == d {
                return Err(RejectReason::Infeasible);
            }
            let (new, region_ids) = if pairing == 0 {
                ([[a, cc], [b, d]], [a, b, d, cc])
            } else {
                ([[a, d], [b, cc]], [a, b, cc, d])
            };
            let edit = Edit {
                remove_edges: edges.to_vec(),
                add_edges: new.iter().map(|p| [VRef::Old(p[0]), VRef::Old(p[1])]).collect(),
                region: region_ids.iter().map(|&x| c.pos(x)).collect(),
                ..Edit::default()
            };
            if local {
                let n1 = c.index().co_occurring(edges[0]);
                if !n1.contains(&edges[1]) {
                    return Err(RejectReason::Infeasible);
                }
                let n2 = c.index().co_occurring(edges[1]).len() as f64;
                let fwd = lw(kind) - n_edges.ln() + (1.0 / n1.len() as f64 + 1.0 / n2).ln() - ln2;
                let f1 = Segment::new(c.pos(new[0][0]), c.pos(new[0][1]));
                let f2 = Segment::new(c.pos(new[1][0]), c.pos(new[1][1]));
                let (m1, meets) = co_occurring_after(c, &f1, &f2, edges);
                let (m2, _) = co_occurring_after(c, &f2, &f1, edges);
                if !meets {
                    return Err(RejectReason::Irreversible);
                }
                let rev = lw(kind) - n_edges.ln() + (1.0 / m1 as f64 + 1.0 / m2 as f64).ln() - ln2;
                (edit, fwd, rev)
            } else {
                let d = lw(kind) - (n_edges * (n_edges - 1.0) / 2.0).ln() - ln2;
                (edit, d, d)
            }
        }
    };
    Ok(MoveProposal {
        kind,
        choice: choice.clone(),
        edit,
        log_forward,
        log_reverse,
    })
}

/// The choice that undoes `choice`, given the states before and after it
/// was applied.
pub fn inverse_choice(choice: &MoveChoice, before: &Coloring, applied: &AppliedEdit) -> MoveChoice {
    let added = |k: usize| applied.added[k].0;
    match *choice {
        MoveChoice::TriangleBirth { .. } => {
            let mut t = [applied.new_vertices[0], applied.new_vertices[1], applied.new_vertices[2]];
            t.sort_unstable();
            MoveChoice::TriangleDeath { triangle: t }
        }
        MoveChoice::TriangleDeath { triangle } => MoveChoice::TriangleBirth {
            pts: triangle.map(|v| before.pos(v)),
        },
        MoveChoice::WedgeBirth { .. } => MoveChoice::WedgeDeath {
            vertex: applied.new_vertices[1],
        },
        MoveChoice::WedgeDeath { vertex } => {
            let nb = before.neighbors(vertex);
            MoveChoice::WedgeBirth {
                ends: [before.pos(nb[0]), before.pos(nb[1])],
                apex: before.pos(vertex),
            }
        }
        MoveChoice::ChordBirth { .. } => MoveChoice::ChordDeath { edge: added(0) },
        MoveChoice::ChordDeath { edge } => {
            let e = before.edge(edge).unwrap();
            MoveChoice::ChordBirth {
                ends: e.v.map(|v| before.pos(v)),
            }
        }
        MoveChoice::KinkBirth { .. } => MoveChoice::KinkDeath {
            vertex: applied.new_vertices[0],
        },
        MoveChoice::KinkDeath { vertex } => MoveChoice::KinkBirth {
            edge: added(0),
            pos: before.pos(vertex),
        },
        MoveChoice::Relocate { vertex, .. } => MoveChoice::Relocate {
            vertex: applied.new_vertices[0],
            pos: before.pos(vertex),
        },
        MoveChoice::BoundarySlide { vertex, .. } => MoveChoice::BoundarySlide {
            vertex: applied.new_vertices[0],
            pos: before.pos(vertex),
        },
        MoveChoice::SlideAlongEdge { vertex, .. } => MoveChoice::SlideAlongEdge {
            vertex: applied.new_vertices[0],
            edge: added(1),
            pos: before.pos(vertex),
        },
        MoveChoice::Recolor { local, .. } => MoveChoice::Recolor {
            edges: [added(0), added(1)],
            pairing: 0,
            local,
        },
    }
}
