//! Per-cell scalar fields over a grid.

use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::geometry::GridSpec;

/// One value per grid cell, row-major from the window's `min` corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl Raster {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "raster has {} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Raster { grid, values })
    }

    pub fn filled(grid: GridSpec, value: f64) -> Self {
        Raster {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// 1 where the cell center is black in `c`, 0 where it is white.
    pub fn from_coloring(c: &Coloring, grid: GridSpec) -> Self {
        let values = (0..grid.len())
            .map(|i| if c.color_at(grid.cell_center(grid.coord(i))).is_black() { 1.0 } else { 0.0 })
            .collect();
        Raster { grid, values }
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.values[self.grid.linear((i, j))]
    }
}
