//! Sensor models that turn the prior into a posterior: laser beams, sonar
//! cones and noisy point-color measurements, together with the incremental
//! bookkeeping a chain needs to keep the data term current.

mod index;
mod laser;
mod point;
mod sonar;
mod state;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cone, Point2, Pose};

pub use index::ObservationIndex;
pub use laser::{laser_expected_distance, laser_log_likelihood, laser_log_likelihood_given};
pub use point::point_log_likelihood;
pub use sonar::{
    return_probabilities, sonar_features, sonar_log_likelihood, sonar_log_likelihood_given, sonar_scene, SonarFeature,
    SonarScene,
};
pub use state::LikelihoodState;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log of the normal density with mean `mean` and deviation `sigma` at `x`.
pub fn normal_log_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
}

/// Probability that a normal draw exceeds `x`.
pub fn normal_upper_tail(x: f64, mean: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc((x - mean) / (sigma * std::f64::consts::SQRT_2))
}

fn check_range(range: f64, max_range: f64, max_flag: bool) -> Result<()> {
    if !(max_range > 0.0 && max_range.is_finite()) {
        return Err(Error::InvalidGeometry(format!("max range must be positive, got {max_range}")));
    }
    if !(range > 0.0 && range <= max_range) {
        return Err(Error::InvalidGeometry(format!("range {range} outside (0, {max_range}]")));
    }
    if max_flag && range != max_range {
        return Err(Error::InvalidGeometry(format!("max-range reading must equal {max_range}, got {range}")));
    }
    Ok(())
}

/// One laser beam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserObs {
    pub pose: Pose,
    /// Beam direction relative to the heading, radians.
    pub bearing: f64,
    pub range: f64,
    pub max_range: f64,
    /// Set when the sensor reported no return.
    pub max_flag: bool,
}

impl LaserObs {
    pub fn new(pose: Pose, bearing: f64, range: f64, max_range: f64, max_flag: bool) -> Result<Self> {
        check_range(range, max_range, max_flag)?;
        Ok(LaserObs {
            pose,
            bearing,
            range,
            max_range,
            max_flag,
        })
    }

    pub fn origin(&self) -> Point2 {
        self.pose.pos
    }

    /// Absolute beam direction.
    pub fn direction(&self) -> f64 {
        self.pose.heading + self.bearing
    }
}

/// Default sonar half aperture: 10 degrees, a 20 degree spread.
pub const DEFAULT_SONAR_HALF_ANGLE: f64 = 10.0 * std::f64::consts::PI / 180.0;
/// Readings past this depth are treated as max-range readings.
pub const DEFAULT_SONAR_MAX_RANGE: f64 = 3.5;
pub const DEFAULT_LASER_MAX_RANGE: f64 = 8.0;

/// One sonar reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SonarObs {
    pub pose: Pose,
    pub bearing: f64,
    pub half_angle: f64,
    pub range: f64,
    pub max_range: f64,
    pub max_flag: bool,
}

impl SonarObs {
    pub fn new(pose: Pose, bearing: f64, half_angle: f64, range: f64, max_range: f64, max_flag: bool) -> Result<Self> {
        check_range(range, max_range, max_flag)?;
        let obs = SonarObs {
            pose,
            bearing,
            half_angle,
            range,
            max_range,
            max_flag,
        };
        obs.cone()?;
        Ok(obs)
    }

    pub fn origin(&self) -> Point2 {
        self.pose.pos
    }

    pub fn direction(&self) -> f64 {
        self.pose.heading + self.bearing
    }

    pub fn cone(&self) -> Result<Cone> {
        Cone::new(self.pose.pos, self.direction(), self.half_angle, self.max_range)
    }
}

/// A noisy scalar measurement of the color at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointColorObs {
    pub location: Point2,
    pub value: f64,
    pub mu_black: f64,
    pub mu_white: f64,
    pub sigma: f64,
}

impl PointColorObs {
    pub fn new(location: Point2, value: f64, mu_black: f64, mu_white: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("point noise must be positive, got {sigma}")));
        }
        Ok(PointColorObs {
            location,
            value,
            mu_black,
            mu_white,
            sigma,
        })
    }
}

fn check_weights(name: &str, w: &[f64]) -> Result<()> {
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("{name} weights must be non-negative and sum to 1, got {w:?}")));
    }
    Ok(())
}

/// Laser mixture: a Gaussian around the expected distance, a uniform
/// outlier term and a point mass for max-range readings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    /// Noise as a fraction of the expected distance.
    pub sigma_rel: f64,
    /// Noise floor, meters.
    pub sigma_min: f64,
    pub w_gauss: f64,
    pub w_uniform: f64,
    pub w_maxrange: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            sigma_rel: 0.01,
            sigma_min: 0.01,
            w_gauss: 0.9,
            w_uniform: 0.05,
            w_maxrange: 0.05,
        }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rel >= 0.0 && self.sigma_min > 0.0) {
            return Err(Error::Config("laser noise must be positive".into()));
        }
        check_weights("laser", &[self.w_gauss, self.w_uniform, self.w_maxrange])
    }

    /// Measurement deviation for a beam whose expected distance is `d`.
    pub fn sigma(&self, d: f64) -> f64 {
        (self.sigma_rel * d).max(self.sigma_min)
    }
}

/// Sonar return model: logistic return probabilities for corners and faces,
/// Gaussian range error, and an outlier mixture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SonarParams {
    pub corner_intercept: f64,
    /// Per meter.
    pub corner_distance: f64,
    pub face_intercept: f64,
    /// Per meter of depth.
    pub face_distance: f64,
    /// Per radian of projection angle (head-on is pi/2).
    pub face_projection: f64,
    /// Per radian of subtended angle.
    pub face_subtended: f64,
    pub sigma: f64,
    pub w_uniform: f64,
    pub w_exponential: f64,
    pub w_maxrange: f64,
    /// Rate of the exponential outlier term, per meter.
    pub beta: f64,
}

impl Default for SonarParams {
    fn default() -> Self {
        SonarParams {
            corner_intercept: 1.0,
            corner_distance: -1.0,
            face_intercept: -4.672,
            face_distance: -0.5,
            face_projection: 3.5,
            face_subtended: 15.0,
            sigma: 0.03,
            w_uniform: 0.3,
            w_exponential: 0.2,
            w_maxrange: 0.5,
            beta: 2.0,
        }
    }
}

impl SonarParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::Config("sonar noise must be positive".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config("sonar outlier rate must be positive".into()));
        }
        let coeffs = [
            self.corner_intercept,
            self.corner_distance,
            self.face_intercept,
            self.face_distance,
            self.face_projection,
            self.face_subtended,
        ];
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("sonar coefficients must be finite".into()));
        }
        check_weights("sonar outlier", &[self.w_uniform, self.w_exponential, self.w_maxrange])
    }
}

/// Parameters of every sensor model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub laser: LaserParams,
    pub sonar: SonarParams,
}

impl SensorParams {
    pub fn validate(&self) -> Result<()> {
        self.laser.validate()?;
        self.sonar.validate()
    }
}

/// Any observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Laser(LaserObs),
    Sonar(SonarObs),
    Point(PointColorObs),
}

impl Observation {
    /// Location whose color the observation depends on.
    pub fn origin(&self) -> Point2 {
        match self {
            Observation::Laser(o) => o.origin(),
            Observation::Sonar(o) => o.origin(),
            Observation::Point(o) => o.location,
        }
    }
}
