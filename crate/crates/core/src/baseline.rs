//! Occupancy-grid mapper used as the comparison baseline.
//!
//! Cells are independent binary variables updated with fixed log-odds
//! increments from inverse sensor models. Updates are stored as integer hit
//! counts, so the final grid does not depend on the order of the readings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, GridSpec, Point2, Segment};
use crate::sensors::{LaserObs, Observation, SonarObs};

/// Log-odds increments of the inverse sensor models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub laser_occupied: f64,
    pub laser_free: f64,
    pub sonar_occupied: f64,
    pub sonar_free: f64,
    /// Radial thickness of a sonar impact arc, in cells.
    pub sonar_arc_cells: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            laser_occupied: 0.4,
            laser_free: 0.4,
            sonar_occupied: 0.15,
            sonar_free: 0.15,
            sonar_arc_cells: 1.0,
        }
    }
}

/// Default baseline cell size, meters.
pub const DEFAULT_BASELINE_CELL: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Counts {
    laser_occupied: u32,
    laser_free: u32,
    sonar_occupied: u32,
    sonar_free: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    grid: GridSpec,
    params: BaselineParams,
    counts: Vec<Counts>,
}

impl OccupancyGrid {
    pub fn new(grid: GridSpec, params: BaselineParams) -> Self {
        OccupancyGrid {
            grid,
            params,
            counts: vec![Counts::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Log-odds of occupancy of cell `i`; zero means the 50% prior.
    pub fn log_odds(&self, i: usize) -> f64 {
        let c = &self.counts[i];
        let p = &self.params;
        c.laser_occupied as f64 * p.laser_occupied - c.laser_free as f64 * p.laser_free
            + c.sonar_occupied as f64 * p.sonar_occupied
            - c.sonar_free as f64 * p.sonar_free
    }

    /// Occupancy probability of every cell.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| 1.0 / (1.0 + (-self.log_odds(i)).exp())).collect()
    }

    /// Cells along the beam are marked free and the cell holding the impact
    /// occupied; a max-range beam frees every cell it crosses.
    pub fn update_laser(&mut self, o: &LaserObs) {
        let dir = Point2::from_polar(1.0, o.direction());
        let end = o.origin() + dir * o.range;
        let Some(beam) = self.grid.window.clip_segment(&Segment::new(o.origin(), end)) else {
            return;
        };
        let impact = (!o.max_flag && self.grid.window.contains(end)).then(|| self.grid.cell_of(end));
        for cell in self.grid.trace_segment(&beam) {
            let c = &mut self.counts[self.grid.linear(cell)];
            if Some(cell) == impact {
                c.laser_occupied += 1;
            } else {
                c.laser_free += 1;
            }
        }
    }

    /// Cells whose center lies in the cone short of the reading are marked
    /// free, and those on the impact arc occupied. A max-range reading frees
    /// the whole cone.
    pub fn update_sonar(&mut self, o: &SonarObs) {
        let Ok(cone) = o.cone() else {
            return;
        };
        let half_arc = 0.5 * self.params.sonar_arc_cells * self.grid.cell_size;
        let reach = if o.max_flag { o.range } else { o.range + half_arc };
        for cell in self.grid.cells_overlapping_convex(&cone.enclosing_polygon(reach)) {
            let p = self.grid.cell_center(cell);
            let d = p.dist(o.origin());
            if d == 0.0 || wrap_angle((p - o.origin()).angle() - cone.heading).abs() > cone.half_angle {
                continue;
            }
            let c = &mut self.counts[self.grid.linear(cell)];
            if o.max_flag {
                if d <= o.range {
                    c.sonar_free += 1;
                }
            } else if (d - o.range).abs() <= half_arc {
                c.sonar_occupied += 1;
            } else if d < o.range {
                c.sonar_free += 1;
            }
        }
    }

    pub fn update(&mut self, o: &Observation) {
        match o {
            Observation::Laser(l) => self.update_laser(l),
            Observation::Sonar(s) => self.update_sonar(s),
            Observation::Point(_) => {}
        }
    }

    /// Add another grid's evidence to this one.
    pub fn merge(&mut self, other: &OccupancyGrid) -> Result<()> {
        if self.grid != other.grid || self.params != other.params {
            return Err(Error::GridMismatch("occupancy grids differ in layout or increments".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.laser_occupied += b.laser_occupied;
            a.laser_free += b.laser_free;
            a.sonar_occupied += b.sonar_occupied;
            a.sonar_free += b.sonar_free;
        }
        Ok(())
    }
}

/// Occupancy grid built from every laser and sonar reading in `obs`.
pub fn build_occupancy_grid(grid: GridSpec, params: BaselineParams, obs: &[Observation]) -> OccupancyGrid {
    let mut g = OccupancyGrid::new(grid, params);
    for o in obs {
        g.update(o);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Rect};
    use crate::sensors::DEFAULT_SONAR_HALF_ANGLE;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn grid() -> GridSpec {
        GridSpec::new(Rect::from_size(4.0, 4.0).unwrap(), 0.05).unwrap()
    }

    fn beam(range: f64, flag: bool) -> LaserObs {
        LaserObs::new(Pose::new(1.025, 2.025, 0.0), 0.0, range, 3.0, flag).unwrap()
    }

    #[test]
    fn laser_frees_path_and_marks_impact() {
        let mut g = OccupancyGrid::new(grid(), BaselineParams::default());
        g.update_laser(&beam(1.0, false));
        let p = g.probabilities();
        let at = |x: f64| p[grid().linear(grid().cell_of(Point2::new(x, 2.025)))];
        assert!(at(1.5) < 0.5);
        assert!(at(1.04) < 0.5);
        assert!(at(2.025) > 0.5);
        assert_eq!(at(2.5), 0.5);
    }

    #[test]
    fn max_range_frees_everything() {
        let mut g = OccupancyGrid::new(grid(), BaselineParams::default());
        g.update_laser(&beam(3.0, true));
        assert!(g.probabilities().iter().all(|&p| p <= 0.5));
    }

    #[test]
    fn repeated_beams_add_up() {
        let mut g = OccupancyGrid::new(grid(), BaselineParams::default());
        g.update_laser(&beam(1.0, false));
        g.update_laser(&beam(1.0, false));
        let i = grid().linear(grid().cell_of(Point2::new(1.5, 2.025)));
        assert!((g.log_odds(i) + 0.8).abs() < 1e-12);
    }

    #[test]
    fn sonar_arc_and_cone() {
        let mut g = OccupancyGrid::new(grid(), BaselineParams::default());
        let o = SonarObs::new(Pose::new(0.5, 2.0, 0.0), 0.0, DEFAULT_SONAR_HALF_ANGLE, 2.02, 3.5, false).unwrap();
        g.update_sonar(&o);
        let p = g.probabilities();
        let at = |x: f64, y: f64| p[grid().linear(grid().cell_of(Point2::new(x, y)))];
        assert!(at(2.525, 2.025) > 0.5);
        assert!(at(1.525, 2.025) < 0.5);
        assert_eq!(at(3.5, 2.0), 0.5);
        let mut g = OccupancyGrid::new(grid(), BaselineParams::default());
        let o = SonarObs::new(Pose::new(0.5, 2.0, 0.0), 0.0, DEFAULT_SONAR_HALF_ANGLE, 3.0, 3.0, true).unwrap();
        g.update_sonar(&o);
        assert!(g.probabilities().iter().all(|&p| p <= 0.5));
    }

    #[test]
    fn order_does_not_matter() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut obs: Vec<Observation> = (0..200)
            .map(|k| {
                let pose = Pose::new(0.3 + 0.01 * k as f64, 1.0 + 0.01 * k as f64, 0.1 * k as f64);
                if k % 2 == 0 {
                    Observation::Laser(LaserObs::new(pose, 0.2, 0.5 + 0.01 * k as f64, 3.0, false).unwrap())
                } else {
                    Observation::Sonar(SonarObs::new(pose, 0.0, DEFAULT_SONAR_HALF_ANGLE, 1.0, 3.5, false).unwrap())
                }
            })
            .collect();
        let a = build_occupancy_grid(grid(), BaselineParams::default(), &obs);
        obs.shuffle(&mut rng);
        let b = build_occupancy_grid(grid(), BaselineParams::default(), &obs);
        assert_eq!(a, b);
        assert_eq!(a.probabilities(), b.probabilities());
    }
}
