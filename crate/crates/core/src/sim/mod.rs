//! Synthetic worlds, scan simulation and map scoring.

mod metrics;
mod scan;
mod world;

pub use metrics::{classification_accuracy, scored_cells};
pub use scan::{
    draw_laser_reading, draw_sonar_reading, poses_along, simulate_laser, simulate_sonar, simulate_trajectory,
    LaserRig, ScanRecord, SonarRig, TrajectorySpec, SCAN_PERIOD,
};
pub use world::{make_world, Layout, World, WorldSpec};

impl World {
    /// Default survey of this world: the built-in route with the given
    /// sensors.
    pub fn trajectory(&self, spacing: f64, laser: Option<LaserRig>, sonar: Option<SonarRig>) -> TrajectorySpec {
        TrajectorySpec {
            waypoints: self.route.clone(),
            spacing,
            laser,
            sonar,
        }
    }
}
