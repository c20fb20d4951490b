use serde::{Deserialize, Serialize};

use super::{Color, Coloring, VertexKind};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub kind: VertexKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: u32,
    pub v: [u32; 2],
}

/// Serializable form of a coloring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonMap {
    pub window: Rect,
    pub anchor: Point2,
    pub anchor_color: Color,
    pub index_cell_size: f64,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl Coloring {
    pub fn to_map(&self) -> PolygonMap {
        PolygonMap {
            window: self.window,
            anchor: self.anchor,
            anchor_color: self.anchor_color,
            index_cell_size: self.index.grid().cell_size,
            vertices: self
                .vertices()
                .map(|(id, v)| VertexRecord {
                    id,
                    x: v.pos.x,
                    y: v.pos.y,
                    kind: v.kind,
                })
                .collect(),
            edges: self.edges().map(|(id, e)| EdgeRecord { id, v: e.v }).collect(),
        }
    }

    /// Rebuild a coloring from its serialized form, checking validity.
    pub fn from_map(m: &PolygonMap) -> Result<Self> {
        let window = Rect::new(m.window.min, m.window.max)?;
        if m.anchor != window.center() {
            return Err(Error::InvalidGeometry("anchor must sit at the window center".into()));
        }
        Coloring::from_parts(
            window,
            m.anchor_color,
            m.index_cell_size,
            m.vertices.iter().map(|v| (v.id, Point2::new(v.x, v.y), v.kind)),
            m.edges.iter().map(|e| (e.id, e.v)),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_map())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Coloring::from_map(&serde_json::from_str(s)?)
    }
}
