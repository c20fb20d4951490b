use crate::coloring::AppliedEdit;
use crate::geometry::{point_in_polygon, polygon_bbox, CellCoord, GridSpec, Point2};

/// Grid index of observations.
///
/// Each observation is listed in the cells overlapping its current
/// sensitivity extent (the stretch of space where an added or removed edge
/// could change its likelihood) and, separately, in the cell holding its
/// origin (whose color it depends on).
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationIndex {
    grid: GridSpec,
    cells: Vec<Vec<u32>>,
    extents: Vec<Vec<u32>>,
    origins: Vec<Point2>,
    sites: Vec<Vec<u32>>,
}

fn insert_sorted(v: &mut Vec<u32>, x: u32) {
    if let Err(i) = v.binary_search(&x) {
        v.insert(i, x);
    }
}

fn remove_sorted(v: &mut Vec<u32>, x: u32) {
    if let Ok(i) = v.binary_search(&x) {
        v.remove(i);
    }
}

impl ObservationIndex {
    /// Index for observations with the given origins and empty extents.
    pub fn new(grid: GridSpec, origins: Vec<Point2>) -> Self {
        let mut sites = vec![Vec::new(); grid.len()];
        for (i, &p) in origins.iter().enumerate() {
            sites[grid.linear(grid.cell_of(p))].push(i as u32);
        }
        ObservationIndex {
            grid,
            cells: vec![Vec::new(); grid.len()],
            extents: vec![Vec::new(); origins.len()],
            origins,
            sites,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    /// Linear ids of the cells observation `obs` is listed in.
    pub fn extent_cells(&self, obs: u32) -> &[u32] {
        &self.extents[obs as usize]
    }

    /// Observations whose extent covers cell `c`.
    pub fn cell(&self, c: CellCoord) -> &[u32] {
        &self.cells[self.grid.linear(c)]
    }

    /// Replace the extent of observation `obs`.
    pub fn set_extent(&mut self, obs: u32, cells: impl IntoIterator<Item = CellCoord>) {
        let old = std::mem::take(&mut self.extents[obs as usize]);
        for c in old {
            remove_sorted(&mut self.cells[c as usize], obs);
        }
        let mut new: Vec<u32> = cells.into_iter().map(|c| self.grid.linear(c) as u32).collect();
        new.sort_unstable();
        new.dedup();
        for &c in &new {
            insert_sorted(&mut self.cells[c as usize], obs);
        }
        self.extents[obs as usize] = new;
    }

    /// Sorted ids of observations whose extent covers any of `cells`.
    pub fn observations_in_cells(&self, cells: impl IntoIterator<Item = CellCoord>) -> Vec<u32> {
        let mut out = Vec::new();
        for c in cells {
            out.extend_from_slice(self.cell(c));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Sorted ids of observations whose origin lies inside `poly`.
    pub fn origins_in_polygon(&self, poly: &[Point2]) -> Vec<u32> {
        let Some(bb) = polygon_bbox(poly) else {
            return Vec::new();
        };
        let mut out: Vec<u32> = self
            .grid
            .cells_in_rect(&bb)
            .flat_map(|c| self.sites[self.grid.linear(c)].iter().copied())
            .filter(|&i| point_in_polygon(self.origins[i as usize], poly))
            .collect();
        out.sort_unstable();
        out
    }

    /// Superset of the observations whose likelihood `applied` can change:
    /// those whose extent meets a removed or added edge, and those whose
    /// origin changed color.
    pub fn affected_observations(&self, applied: &AppliedEdit) -> Vec<u32> {
        let mut out = Vec::new();
        for (_, s) in applied.removed.iter().chain(&applied.added) {
            for c in self.grid.trace_segment(s) {
                out.extend_from_slice(self.cell(c));
            }
        }
        out.extend(self.origins_in_polygon(&applied.region));
        out.sort_unstable();
        out.dedup();
        out
    }
}
