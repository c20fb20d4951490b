use super::{Coloring, VertexKind};

/// Components that a single death move can remove.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Components {
    /// Triangles of three interior vertices, as sorted vertex triples.
    pub triangles: Vec<[u32; 3]>,
    /// Interior vertices whose two neighbors are both boundary vertices.
    pub wedges: Vec<u32>,
    /// Edges joining two boundary vertices.
    pub chords: Vec<u32>,
}

pub(super) fn scan(c: &Coloring) -> Components {
    let mut out = Components::default();
    for &v in c.interior_ids() {
        let nb = c.neighbors(v);
        if nb.len() != 2 {
            continue;
        }
        let kind = |x: u32| c.vertex(x).unwrap().kind;
        let kinds = [kind(nb[0]), kind(nb[1])];
        if kinds == [VertexKind::Boundary, VertexKind::Boundary] {
            out.wedges.push(v);
        } else if kinds == [VertexKind::Interior, VertexKind::Interior]
            && v < nb[0]
            && v < nb[1]
            && c.edge_between(nb[0], nb[1]).is_some()
        {
            let mut t = [v, nb[0], nb[1]];
            t.sort_unstable();
            out.triangles.push(t);
        }
    }
    for &b in c.boundary_ids() {
        let nb = c.neighbors(b);
        if let [o] = nb[..] {
            if b < o && c.vertex(o).is_some_and(|x| x.kind == VertexKind::Boundary) {
                out.chords.push(c.edge_between(b, o).unwrap());
            }
        }
    }
    out.triangles.sort_unstable();
    out.chords.sort_unstable();
    out
}
