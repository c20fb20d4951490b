use crate::coloring::{AppliedEdit, Coloring};
use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, polygon_bbox, GridSpec};

/// Per-cell posterior statistics gathered over retained samples.
///
/// Each grid cell contributes one point (its center) and one square. For the
/// point we count samples in which it was black; for the square, samples in
/// which it was entirely white (no edge touches it and its center is white).
///
/// Counting is lazy: the current state of every point and square is tracked,
/// and counts are settled only when a state changes, so the cost of an
/// accepted move is proportional to the area it touches.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorAccumulator {
    grid: GridSpec,
    samples: u64,
    black: Vec<u64>,
    all_white: Vec<u64>,
    live: Option<Live>,
}

#[derive(Clone, Debug, PartialEq)]
struct Live {
    is_black: Vec<bool>,
    edge_hits: Vec<u32>,
    point_since: Vec<u64>,
    cell_since: Vec<u64>,
}

impl PosteriorAccumulator {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.len();
        PosteriorAccumulator {
            grid,
            samples: 0,
            black: vec![0; n],
            all_white: vec![0; n],
            live: None,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Start tracking `c`. Any previous tracking is settled first.
    pub fn attach(&mut self, c: &Coloring) {
        self.settle_all();
        let n = self.grid.len();
        let is_black = (0..n).map(|i| c.color_at(self.grid.cell_center(self.grid.coord(i))).is_black()).collect();
        let mut edge_hits = vec![0u32; n];
        for &e in c.edge_ids() {
            for cell in self.grid.trace_segment(&c.segment(e)) {
                edge_hits[self.grid.linear(cell)] += 1;
            }
        }
        self.live = Some(Live {
            is_black,
            edge_hits,
            point_since: vec![self.samples; n],
            cell_since: vec![self.samples; n],
        });
    }

    fn settle(&mut self, i: usize) {
        let Some(live) = self.live.as_mut() else { return };
        if live.is_black[i] {
            self.black[i] += self.samples - live.point_since[i];
        }
        live.point_since[i] = self.samples;
        if live.edge_hits[i] == 0 && !live.is_black[i] {
            self.all_white[i] += self.samples - live.cell_since[i];
        }
        live.cell_since[i] = self.samples;
    }

    fn settle_all(&mut self) {
        for i in 0..self.grid.len() {
            self.settle(i);
        }
    }

    /// Follow an accepted edit of the tracked coloring.
    pub fn apply(&mut self, applied: &AppliedEdit) {
        if self.live.is_none() {
            return;
        }
        let mut touched: Vec<(usize, bool, i32)> = Vec::new();
        if let Some(bb) = polygon_bbox(&applied.region) {
            for cell in self.grid.cells_in_rect(&bb) {
                if point_in_polygon(self.grid.cell_center(cell), &applied.region) {
                    touched.push((self.grid.linear(cell), true, 0));
                }
            }
        }
        for (_, s) in &applied.removed {
            for cell in self.grid.trace_segment(s) {
                touched.push((self.grid.linear(cell), false, -1));
            }
        }
        for (_, s) in &applied.added {
            for cell in self.grid.trace_segment(s) {
                touched.push((self.grid.linear(cell), false, 1));
            }
        }
        for &(i, _, _) in &touched {
            self.settle(i);
        }
        let live = self.live.as_mut().unwrap();
        for (i, flip, dh) in touched {
            if flip {
                live.is_black[i] = !live.is_black[i];
            }
            live.edge_hits[i] = (live.edge_hits[i] as i64 + dh as i64) as u32;
        }
    }

    /// Count the current state as one retained sample.
    pub fn record_sample(&mut self) {
        self.samples += 1;
    }

    /// Settle all pending counts and stop tracking.
    pub fn detach(&mut self) {
        self.settle_all();
        self.live = None;
    }

    /// Samples in which the center of cell `i` was black.
    pub fn black_count(&mut self, i: usize) -> u64 {
        self.settle(i);
        self.black[i]
    }

    /// Samples in which cell `i` was entirely white.
    pub fn white_count(&mut self, i: usize) -> u64 {
        self.settle(i);
        self.all_white[i]
    }

    /// Fraction of samples with a black center, per cell.
    pub fn black_fraction(&mut self) -> Vec<f64> {
        self.settle_all();
        let n = self.samples.max(1) as f64;
        self.black.iter().map(|&b| b as f64 / n).collect()
    }

    /// Fraction of samples in which the cell was entirely white, per cell.
    pub fn white_fraction(&mut self) -> Vec<f64> {
        self.settle_all();
        let n = self.samples.max(1) as f64;
        self.all_white.iter().map(|&b| b as f64 / n).collect()
    }

    /// Add another accumulator's counts to this one. Both are settled and
    /// detached first.
    pub fn merge(&mut self, other: &PosteriorAccumulator) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("accumulators cover different grids".into()));
        }
        let mut o = other.clone();
        o.detach();
        self.detach();
        self.samples += o.samples;
        for (a, b) in self.black.iter_mut().zip(&o.black) {
            *a += b;
        }
        for (a, b) in self.all_white.iter_mut().zip(&o.all_white) {
            *a += b;
        }
        Ok(())
    }
}
