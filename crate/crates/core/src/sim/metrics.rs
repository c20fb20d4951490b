use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::raster::Raster;

fn near_an_edge(truth: &Coloring, p: Point2, r: f64) -> bool {
    let probe = Rect {
        min: Point2::new(p.x - r, p.y - r),
        max: Point2::new(p.x + r, p.y + r),
    };
    let grid = *truth.index().grid();
    truth
        .index()
        .edges_in_cells(grid.cells_in_rect(&probe))
        .into_iter()
        .any(|e| truth.segment(e).distance_to_point(p) < r)
}

/// Which cells take part in accuracy scoring: centers inside the window
/// and at least half a cell away from every edge of `truth`.
pub fn scored_cells(truth: &Coloring, estimate: &Raster) -> Vec<bool> {
    let g = &estimate.grid;
    (0..g.len())
        .map(|i| {
            let p = g.cell_center(g.coord(i));
            truth.window().contains(p) && !near_an_edge(truth, p, 0.5 * g.cell_size)
        })
        .collect()
}

/// Fraction of scored cells whose thresholded estimate matches the truth.
/// A cell is called occupied when its estimated probability of black
/// exceeds `threshold`.
pub fn classification_accuracy(estimate: &Raster, truth: &Coloring, threshold: f64) -> Result<f64> {
    if estimate.grid.window != *truth.window() {
        return Err(Error::GridMismatch("estimate and truth cover different windows".into()));
    }
    let g = &estimate.grid;
    let mut hits = 0usize;
    let mut total = 0usize;
    for (i, scored) in scored_cells(truth, estimate).into_iter().enumerate() {
        if !scored {
            continue;
        }
        let black = truth.color_at(g.cell_center(g.coord(i))).is_black();
        total += 1;
        if (estimate.values[i] > threshold) == black {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::GridMismatch("no cell is far enough from the walls to score".into()));
    }
    Ok(hits as f64 / total as f64)
}
