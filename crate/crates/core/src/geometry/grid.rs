use serde::{Deserialize, Serialize};

use super::{convex_polygon_intersects_rect, polygon_bbox, Point2, Rect, Segment};
use crate::error::{Error, Result};

pub type CellCoord = (u32, u32);

/// Uniform square grid laid over a window. Cell `(0, 0)` touches the window's
/// `min` corner; the last row and column may stick out past `max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub window: Rect,
    pub cell_size: f64,
}

// Slack used when deciding whether a segment touches a closed cell.
const TRACE_SLACK: f64 = 1e-9;

impl GridSpec {
    pub fn new(window: Rect, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidGeometry(format!("cell size must be positive, got {cell_size}")));
        }
        Ok(GridSpec { window, cell_size })
    }

    pub fn nx(&self) -> u32 {
        ((self.window.width() / self.cell_size) - 1e-9).ceil().max(1.0) as u32
    }

    pub fn ny(&self) -> u32 {
        ((self.window.height() / self.cell_size) - 1e-9).ceil().max(1.0) as u32
    }

    pub fn len(&self) -> usize {
        self.nx() as usize * self.ny() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear(&self, c: CellCoord) -> usize {
        c.1 as usize * self.nx() as usize + c.0 as usize
    }

    pub fn coord(&self, linear: usize) -> CellCoord {
        let nx = self.nx() as usize;
        ((linear % nx) as u32, (linear / nx) as u32)
    }

    pub fn cell_rect(&self, c: CellCoord) -> Rect {
        let min = Point2::new(
            self.window.min.x + c.0 as f64 * self.cell_size,
            self.window.min.y + c.1 as f64 * self.cell_size,
        );
        Rect {
            min,
            max: Point2::new(min.x + self.cell_size, min.y + self.cell_size),
        }
    }

    pub fn cell_center(&self, c: CellCoord) -> Point2 {
        Point2::new(
            self.window.min.x + (c.0 as f64 + 0.5) * self.cell_size,
            self.window.min.y + (c.1 as f64 + 0.5) * self.cell_size,
        )
    }

    /// Cell containing `p`, clamped into the grid.
    pub fn cell_of(&self, p: Point2) -> CellCoord {
        let i = ((p.x - self.window.min.x) / self.cell_size).floor();
        let j = ((p.y - self.window.min.y) / self.cell_size).floor();
        (
            (i.max(0.0) as u32).min(self.nx() - 1),
            (j.max(0.0) as u32).min(self.ny() - 1),
        )
    }

    /// Closed cells whose square meets `rect`.
    pub fn cells_in_rect(&self, rect: &Rect) -> impl Iterator<Item = CellCoord> {
        let cs = self.cell_size;
        let lo = |v: f64, o: f64| (((v - o) / cs - TRACE_SLACK).ceil() - 1.0).max(0.0) as u32;
        let hi = |v: f64, o: f64, n: u32| {
            let f = ((v - o) / cs + TRACE_SLACK).floor();
            if f < 0.0 {
                None
            } else {
                Some((f as u32).min(n - 1))
            }
        };
        let (nx, ny) = (self.nx(), self.ny());
        let i0 = lo(rect.min.x, self.window.min.x);
        let j0 = lo(rect.min.y, self.window.min.y);
        let i1 = hi(rect.max.x, self.window.min.x, nx);
        let j1 = hi(rect.max.y, self.window.min.y, ny);
        let (i1, j1, empty) = match (i1, j1) {
            (Some(a), Some(b)) if i0 <= a && j0 <= b && i0 < nx && j0 < ny => (a, b, false),
            _ => (0, 0, true),
        };
        let rows = if empty { 1..=0 } else { j0..=j1 };
        rows.flat_map(move |j| (i0..=i1).map(move |i| (i, j)))
    }

    /// Cells touched by a convex polygon.
    pub fn cells_overlapping_convex(&self, poly: &[Point2]) -> Vec<CellCoord> {
        let Some(bb) = polygon_bbox(poly) else {
            return Vec::new();
        };
        self.cells_in_rect(&bb)
            .filter(|&c| convex_polygon_intersects_rect(poly, &self.cell_rect(c)))
            .collect()
    }

    pub fn trace_segment(&self, s: &Segment) -> Vec<CellCoord> {
        grid_trace_segment(s, self)
    }
}

/// Supercover of a segment: every closed cell the segment touches, each once,
/// ordered along the segment from `a` to `b`.
///
/// Works column by column: inside each column the segment spans a y-range,
/// and every row overlapping that range is emitted. A segment passing exactly
/// through a grid corner therefore picks up all four incident cells.
pub fn grid_trace_segment(s: &Segment, g: &GridSpec) -> Vec<CellCoord> {
    let Some(s) = g.window.clip_segment(s) else {
        return Vec::new();
    };
    let cs = g.cell_size;
    let (ox, oy) = (g.window.min.x, g.window.min.y);
    let (x0, y0) = ((s.a.x - ox) / cs, (s.a.y - oy) / cs);
    let (x1, y1) = ((s.b.x - ox) / cs, (s.b.y - oy) / cs);
    let (nx, ny) = (g.nx() as i64, g.ny() as i64);
    let (xl, xr) = (x0.min(x1), x0.max(x1));
    let (yl, yr) = (y0.min(y1), y0.max(y1));
    let c_lo = (((xl - TRACE_SLACK).ceil() as i64) - 1).max(0);
    let c_hi = ((xr + TRACE_SLACK).floor() as i64).min(nx - 1);
    if c_lo > c_hi {
        return Vec::new();
    }
    let dx = x1 - x0;
    let dy = y1 - y0;
    let mut out = Vec::new();
    let cols: Box<dyn Iterator<Item = i64>> = if dx >= 0.0 {
        Box::new(c_lo..=c_hi)
    } else {
        Box::new((c_lo..=c_hi).rev())
    };
    for c in cols {
        let (ylo, yhi) = if dx == 0.0 {
            (yl, yr)
        } else {
            let xa = xl.max(c as f64);
            let xb = xr.min((c + 1) as f64);
            let ya = (y0 + (xa - x0) * dy / dx).clamp(yl, yr);
            let yb = (y0 + (xb - x0) * dy / dx).clamp(yl, yr);
            (ya.min(yb), ya.max(yb))
        };
        let r_lo = (((ylo - TRACE_SLACK).ceil() as i64) - 1).max(0);
        let r_hi = ((yhi + TRACE_SLACK).floor() as i64).min(ny - 1);
        if r_lo > r_hi {
            continue;
        }
        if dy >= 0.0 {
            out.extend((r_lo..=r_hi).map(|r| (c as u32, r as u32)));
        } else {
            out.extend((r_lo..=r_hi).rev().map(|r| (c as u32, r as u32)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid(cs: f64) -> GridSpec {
        GridSpec::new(Rect::from_size(1.0, 1.0).unwrap(), cs).unwrap()
    }

    fn brute_force(s: &Segment, g: &GridSpec) -> Vec<CellCoord> {
        let mut cells = Vec::new();
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                if g.cell_rect((i, j)).clip_params(s).is_some() {
                    cells.push((i, j));
                }
            }
        }
        cells
    }

    #[test]
    fn horizontal_segment_spans_three_cells_in_order() {
        let g = GridSpec::new(Rect::from_size(2.0, 1.0).unwrap(), 0.5).unwrap();
        let s = Segment::new(Point2::new(1.4, 0.3), Point2::new(0.1, 0.3));
        assert_eq!(grid_trace_segment(&s, &g), vec![(2, 0), (1, 0), (0, 0)]);
    }

    #[test]
    fn segment_within_one_cell() {
        let g = unit_grid(0.5);
        let s = Segment::new(Point2::new(0.1, 0.1), Point2::new(0.2, 0.3));
        assert_eq!(grid_trace_segment(&s, &g), vec![(0, 0)]);
    }

    #[test]
    fn diagonal_through_corner_gets_all_four() {
        let g = unit_grid(0.5);
        let s = Segment::new(Point2::new(0.2, 0.2), Point2::new(0.8, 0.8));
        let mut got = grid_trace_segment(&s, &g);
        got.sort();
        let mut want = brute_force(&s, &g);
        want.sort();
        assert_eq!(got, want);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn outside_window_is_empty() {
        let g = unit_grid(0.5);
        let s = Segment::new(Point2::new(1.5, 0.1), Point2::new(2.0, 0.3));
        assert!(grid_trace_segment(&s, &g).is_empty());
    }

    proptest! {
        #[test]
        fn supercover_matches_brute_force(c in proptest::collection::vec(0.0f64..1.0, 4), cs in 0.07f64..0.4) {
            let g = unit_grid(cs);
            let s = Segment::new(Point2::new(c[0], c[1]), Point2::new(c[2], c[3]));
            let got = grid_trace_segment(&s, &g);
            let mut sorted = got.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), got.len());
            let mut want = brute_force(&s, &g);
            want.sort();
            prop_assert_eq!(sorted, want);
        }
    }
}
