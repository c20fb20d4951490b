use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose};
use crate::sensors::{
    sonar_scene, LaserObs, LaserParams, Observation, SensorParams, SonarObs, SonarParams, SonarScene,
    DEFAULT_LASER_MAX_RANGE, DEFAULT_SONAR_HALF_ANGLE, DEFAULT_SONAR_MAX_RANGE,
};

/// A planar laser scanner: `beams` beams spread evenly over `fov` radians
/// centered on the heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserRig {
    pub beams: u32,
    pub fov: f64,
    pub max_range: f64,
}

impl Default for LaserRig {
    fn default() -> Self {
        LaserRig {
            beams: 180,
            fov: std::f64::consts::PI,
            max_range: DEFAULT_LASER_MAX_RANGE,
        }
    }
}

impl LaserRig {
    pub fn bearings(&self) -> Vec<f64> {
        let n = self.beams.max(1);
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|k| -0.5 * self.fov + self.fov * k as f64 / (n - 1) as f64).collect()
    }
}

/// A ring of sonar transducers evenly spaced around the robot. Readings
/// beyond `max_range` are reported as max-range readings at `max_range`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SonarRig {
    pub count: u32,
    pub half_angle: f64,
    /// Physical range of the transducers.
    pub sensor_range: f64,
    /// Cutoff applied to the readings.
    pub max_range: f64,
}

impl Default for SonarRig {
    fn default() -> Self {
        SonarRig {
            count: 16,
            half_angle: DEFAULT_SONAR_HALF_ANGLE,
            sensor_range: DEFAULT_SONAR_MAX_RANGE,
            max_range: DEFAULT_SONAR_MAX_RANGE,
        }
    }
}

impl SonarRig {
    pub fn bearings(&self) -> Vec<f64> {
        let n = self.count.max(1);
        (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect()
    }
}

/// Where the robot goes and what it scans with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub waypoints: Vec<Point2>,
    /// Distance between consecutive scan poses, meters.
    pub spacing: f64,
    pub laser: Option<LaserRig>,
    pub sonar: Option<SonarRig>,
}

/// Poses every `spacing` meters along the polyline, heading along the path.
pub fn poses_along(waypoints: &[Point2], spacing: f64) -> Result<Vec<Pose>> {
    if !(spacing > 0.0) {
        return Err(Error::Config(format!("scan spacing must be positive, got {spacing}")));
    }
    let mut out = Vec::new();
    let mut carry = 0.0;
    for w in waypoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let heading = (b - a).angle();
        let mut s = carry;
        while s < len {
            out.push(Pose {
                pos: a.lerp(b, s / len),
                heading,
            });
            s += spacing;
        }
        carry = s - len;
    }
    if let (Some(&last), Some(prev)) = (waypoints.last(), out.last()) {
        if prev.pos.dist(last) > 1e-9 {
            out.push(Pose {
                pos: last,
                heading: prev.heading,
            });
        }
    }
    Ok(out)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

fn positive_normal(mean: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let r = mean + sigma * standard_normal(rng);
        if r > 0.0 {
            return r;
        }
    }
}

/// Draw one laser reading for a beam that would stop at `hit` (or travel
/// freely when `None`): `(range, max_flag)`.
pub fn draw_laser_reading(hit: Option<f64>, max_range: f64, p: &LaserParams, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let u: f64 = rng.random();
    if u < p.w_gauss {
        match hit {
            Some(d) => {
                let r = positive_normal(d, p.sigma(d), rng);
                if r >= max_range {
                    (max_range, true)
                } else {
                    (r, false)
                }
            }
            None => (max_range, true),
        }
    } else if u < p.w_gauss + p.w_uniform {
        let r = max_range * (1.0 - rng.random::<f64>());
        if r >= max_range {
            (max_range, true)
        } else {
            (r, false)
        }
    } else {
        (max_range, true)
    }
}

/// Draw one sonar reading from a scene: a feature returns the pulse with
/// its return probability, otherwise an outlier is drawn.
pub fn draw_sonar_reading(scene: &SonarScene, max_range: f64, p: &SonarParams, rng: &mut ChaCha8Rng) -> (f64, bool) {
    let mut u: f64 = rng.random();
    let clamp = |r: f64| if r >= max_range { (max_range, true) } else { (r, false) };
    for f in &scene.features {
        if u < f.r {
            return clamp(positive_normal(f.feature.depth, p.sigma, rng));
        }
        u -= f.r;
    }
    let v: f64 = rng.random();
    if v < p.w_uniform {
        clamp(max_range * (1.0 - rng.random::<f64>()))
    } else if v < p.w_uniform + p.w_exponential {
        let w: f64 = rng.random();
        let r = -(-w * (-(-p.beta * max_range).exp_m1())).ln_1p() / p.beta;
        clamp(r.max(f64::MIN_POSITIVE))
    } else {
        (max_range, true)
    }
}

fn check_pose(world: &Coloring, pose: Pose) -> Result<()> {
    if !world.window().contains(pose.pos) || world.color_at(pose.pos).is_black() {
        return Err(Error::PoseOccupied(pose.pos));
    }
    Ok(())
}

/// One laser scan from `pose`.
pub fn simulate_laser(
    world: &Coloring,
    pose: Pose,
    rig: &LaserRig,
    p: &LaserParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<LaserObs>> {
    check_pose(world, pose)?;
    rig.bearings()
        .into_iter()
        .map(|bearing| {
            let hit = world.index().ray_cast(pose.pos, pose.heading + bearing, rig.max_range);
            let (range, flag) = draw_laser_reading(hit.map(|h| h.distance), rig.max_range, p, rng);
            LaserObs::new(pose, bearing, range, rig.max_range, flag)
        })
        .collect()
}

/// One reading from each transducer of the ring at `pose`.
pub fn simulate_sonar(
    world: &Coloring,
    pose: Pose,
    rig: &SonarRig,
    p: &SonarParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SonarObs>> {
    check_pose(world, pose)?;
    rig.bearings()
        .into_iter()
        .map(|bearing| {
            let probe = SonarObs::new(pose, bearing, rig.half_angle, rig.sensor_range, rig.sensor_range, true)?;
            let scene = sonar_scene(&probe, world, p);
            let (range, flag) = draw_sonar_reading(&scene, rig.sensor_range, p, rng);
            if flag || range >= rig.max_range {
                SonarObs::new(pose, bearing, rig.half_angle, rig.max_range, rig.max_range, true)
            } else {
                SonarObs::new(pose, bearing, rig.half_angle, range, rig.max_range, false)
            }
        })
        .collect()
}

/// A timestamped observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub t: f64,
    pub obs: Observation,
}

/// Seconds between consecutive scan poses in simulated logs.
pub const SCAN_PERIOD: f64 = 0.5;

/// Drive the trajectory through `world`, scanning at every pose.
pub fn simulate_trajectory(
    world: &Coloring,
    traj: &TrajectorySpec,
    p: &SensorParams,
    seed: u64,
) -> Result<Vec<ScanRecord>> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (k, pose) in poses_along(&traj.waypoints, traj.spacing)?.into_iter().enumerate() {
        let t = k as f64 * SCAN_PERIOD;
        if let Some(rig) = &traj.laser {
            for o in simulate_laser(world, pose, rig, &p.laser, &mut rng)? {
                out.push(ScanRecord {
                    t,
                    obs: Observation::Laser(o),
                });
            }
        }
        if let Some(rig) = &traj.sonar {
            for o in simulate_sonar(world, pose, rig, &p.sonar, &mut rng)? {
                out.push(ScanRecord {
                    t,
                    obs: Observation::Sonar(o),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::Color;
    use crate::geometry::Rect;
    use crate::sensors::{laser_log_likelihood_given, normal_upper_tail};

    fn walled() -> Coloring {
        let ring = vec![
            Point2::new(1.0, 1.0),
            Point2::new(3.0, 1.0),
            Point2::new(3.0, 9.0),
            Point2::new(1.0, 9.0),
        ];
        Coloring::from_polygons(Rect::from_size(10.0, 10.0).unwrap(), Color::White, 0.5, &[ring]).unwrap()
    }

    #[test]
    fn poses_are_evenly_spaced() {
        let wp = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)];
        let poses = poses_along(&wp, 0.25).unwrap();
        assert_eq!(poses.len(), 9);
        for w in poses.windows(2) {
            let d = (w[1].pos.x - w[0].pos.x).abs() + (w[1].pos.y - w[0].pos.y).abs();
            assert!((d - 0.25).abs() < 1e-12);
        }
        assert_eq!(poses[5].heading, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn noise_free_wall_reading() {
        let p = LaserParams {
            sigma_rel: 0.0,
            sigma_min: 1e-12,
            w_gauss: 1.0,
            w_uniform: 0.0,
            w_maxrange: 0.0,
        };
        let rig = LaserRig {
            beams: 1,
            ..LaserRig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = simulate_laser(&walled(), Pose::new(5.0, 5.0, std::f64::consts::PI), &rig, &p, &mut rng).unwrap();
        assert!((obs[0].range - 2.0).abs() < 1e-9);
        assert!(!obs[0].max_flag);
    }

    #[test]
    fn empty_world_gives_max_range() {
        let c = Coloring::new(Rect::from_size(10.0, 10.0).unwrap(), Color::White);
        let p = LaserParams {
            w_gauss: 0.95,
            w_uniform: 0.0,
            w_maxrange: 0.05,
            ..LaserParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = simulate_laser(&c, Pose::new(5.0, 5.0, 0.0), &LaserRig::default(), &p, &mut rng).unwrap();
        assert!(obs.iter().all(|o| o.max_flag && o.range == o.max_range));
    }

    #[test]
    fn occupied_pose_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = simulate_laser(&walled(), Pose::new(2.0, 5.0, 0.0), &LaserRig::default(), &LaserParams::default(), &mut rng);
        assert!(matches!(err, Err(Error::PoseOccupied(_))));
    }

    #[test]
    fn laser_draws_follow_the_density() {
        let p = LaserParams::default();
        let (d, max) = (2.0, 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut flagged = 0usize;
        let edges: Vec<f64> = vec![0.0, 1.0, 1.9, 1.98, 2.0, 2.02, 2.1, 4.0, 8.0];
        let mut hist = vec![0usize; edges.len() - 1];
        for _ in 0..n {
            let (r, flag) = draw_laser_reading(Some(d), max, &p, &mut rng);
            if flag {
                flagged += 1;
                continue;
            }
            let k = edges.windows(2).position(|w| w[0] <= r && r < w[1]).unwrap();
            hist[k] += 1;
        }
        let want_flag = p.w_maxrange + p.w_gauss * normal_upper_tail(max, d, p.sigma(d));
        assert!((flagged as f64 / n as f64 - want_flag).abs() < 0.005);
        // Expected bin mass from the unflagged part of the density.
        let probe = |r: f64| LaserObs::new(Pose::default(), 0.0, r, max, false).unwrap();
        for (k, w) in edges.windows(2).enumerate() {
            let m = 4000;
            let h = (w[1] - w[0]) / m as f64;
            let mass: f64 = (0..m)
                .map(|i| laser_log_likelihood_given(&probe(w[0] + (i as f64 + 0.5) * h), d, &p).exp() * h)
                .sum();
            let got = hist[k] as f64 / n as f64;
            let tol = 4.0 * (mass * (1.0 - mass) / n as f64).sqrt() + 1e-3;
            assert!((got - mass).abs() < tol, "bin {k}: {got} vs {mass}");
        }
    }

    #[test]
    fn sonar_draws_follow_the_density() {
        let c = walled();
        let p = SonarParams::default();
        let pose = Pose::new(4.2, 5.0, std::f64::consts::PI);
        let probe = |r: f64, flag: bool| SonarObs::new(pose, 0.0, DEFAULT_SONAR_HALF_ANGLE, r, 3.5, flag).unwrap();
        let scene = sonar_scene(&probe(3.5, true), &c, &p);
        assert_eq!(scene.features.len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let edges: Vec<f64> = vec![0.0, 0.5, 1.1, 1.17, 1.2, 1.23, 1.3, 2.5, 3.5];
        let mut hist = vec![0usize; edges.len() - 1];
        let mut flagged = 0usize;
        let mut near = 0usize;
        for _ in 0..n {
            let (r, flag) = draw_sonar_reading(&scene, 3.5, &p, &mut rng);
            if flag {
                flagged += 1;
                continue;
            }
            if (r - 1.2).abs() < 0.15 {
                near += 1;
            }
            hist[edges.windows(2).position(|w| w[0] <= r && r < w[1]).unwrap()] += 1;
        }
        let q = scene.features[0].q;
        assert!((near as f64 / n as f64 - q).abs() < 0.01, "{near} vs q = {q}");
        let want_flag = crate::sensors::sonar_log_likelihood_given(&probe(3.5, true), &scene, &p).exp();
        assert!((flagged as f64 / n as f64 - want_flag).abs() < 0.005);
        for (k, w) in edges.windows(2).enumerate() {
            let m = 4000;
            let h = (w[1] - w[0]) / m as f64;
            let mass: f64 = (0..m)
                .map(|i| {
                    let r = w[0] + (i as f64 + 0.5) * h;
                    crate::sensors::sonar_log_likelihood_given(&probe(r, false), &scene, &p).exp() * h
                })
                .sum();
            let got = hist[k] as f64 / n as f64;
            let tol = 4.0 * (mass * (1.0 - mass) / n as f64).sqrt() + 1e-3;
            assert!((got - mass).abs() < tol, "bin {k}: {got} vs {mass}");
        }
    }

    #[test]
    fn sonar_cutoff_flags_long_readings() {
        let c = Coloring::new(Rect::from_size(20.0, 20.0).unwrap(), Color::White);
        let rig = SonarRig {
            sensor_range: 6.0,
            ..SonarRig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen_cut = false;
        for _ in 0..50 {
            for o in simulate_sonar(&c, Pose::new(10.0, 10.0, 0.0), &rig, &SonarParams::default(), &mut rng).unwrap() {
                assert!(o.range <= 3.5 && o.max_range == 3.5);
                assert!(!o.max_flag || o.range == 3.5);
                seen_cut |= o.max_flag;
            }
        }
        assert!(seen_cut);
    }
}
