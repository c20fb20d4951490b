use super::PointColorObs;
use crate::coloring::Color;

/// Gaussian log-likelihood of a point measurement given the color at its
/// location, dropping the normalizing constant.
pub fn point_log_likelihood(o: &PointColorObs, color: Color) -> f64 {
    let mu = if color.is_black() { o.mu_black } else { o.mu_white };
    let z = o.value - mu;
    -z * z / (2.0 * o.sigma * o.sigma)
}
