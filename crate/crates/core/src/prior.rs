//! The Arak polygonal Markov field prior.

use serde::{Deserialize, Serialize};

use crate::coloring::{CachedStats, Coloring, StatsDelta, MIN_SIN_ANGLE};
use crate::error::{Error, Result};
use crate::geometry::Rect;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArakParams {
    /// Scale parameter, per meter.
    pub p: f64,
    pub window: Rect,
}

impl ArakParams {
    pub fn new(p: f64, window: Rect) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Config(format!("scale parameter must be positive, got {p}")));
        }
        Ok(ArakParams { p, window })
    }

    /// Log density of a state with the given cached statistics.
    pub fn log_density_from_stats(&self, s: &CachedStats) -> f64 {
        s.edge_count as f64 * self.p.ln() - s.sum_log_length + s.sum_log_sin - 2.0 * self.p * s.total_length
    }

    /// Change in log density caused by an edit.
    pub fn log_density_delta(&self, d: &StatsDelta) -> f64 {
        d.edge_count as f64 * self.p.ln() - d.sum_log_length + d.sum_log_sin - 2.0 * self.p * d.total_length
    }
}

/// Unnormalized log density of `c` with respect to the base measure on
/// vertex configurations: `|E| ln p - sum ln|e| + sum ln sin(phi_v) - 2p sum |e|`.
/// States with a vertex angle sharper than the floor get `-inf`.
pub fn unnormalized_log_density(c: &Coloring, a: &ArakParams) -> f64 {
    let sharp = c.vertices().any(|(id, v)| v.edges.len() == v.kind.degree() && c.vertex_sin(id) < MIN_SIN_ANGLE);
    if sharp {
        return f64::NEG_INFINITY;
    }
    a.log_density_from_stats(c.stats())
}

/// Mean number of edges inside the unit square.
pub fn expected_edge_count(a: &ArakParams) -> Result<f64> {
    let w = &a.window;
    if (w.width() - 1.0).abs() > 1e-12 || (w.height() - 1.0).abs() > 1e-12 {
        return Err(Error::UnsupportedWindow(format!(
            "closed form known only for the unit square, got {} x {}",
            w.width(),
            w.height()
        )));
    }
    Ok(4.0 * a.p + 4.0 * std::f64::consts::PI * a.p * a.p)
}

/// Probability that two points `d` apart share a color.
pub fn same_color_probability(p: f64, d: f64) -> f64 {
    0.5 * (1.0 + (-4.0 * p * d).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{Color, VertexKind};
    use crate::geometry::Point2;

    fn unit(p: f64) -> ArakParams {
        ArakParams::new(p, Rect::from_size(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn empty_coloring_has_zero_log_density() {
        let c = Coloring::new(Rect::from_size(1.0, 1.0).unwrap(), Color::White);
        assert_eq!(unnormalized_log_density(&c, &unit(0.1)), 0.0);
    }

    #[test]
    fn unit_chord_log_density() {
        let w = Rect::from_size(1.0, 1.0).unwrap();
        let c = Coloring::from_parts(
            w,
            Color::White,
            0.5,
            [
                (0, Point2::new(0.3, 0.0), VertexKind::Boundary),
                (1, Point2::new(0.3, 1.0), VertexKind::Boundary),
            ],
            [(0, [0, 1])],
        )
        .unwrap();
        let want = 0.1f64.ln() - 0.2;
        assert!((unnormalized_log_density(&c, &unit(0.1)) - want).abs() < 1e-12);
        assert!((want - (-2.5026)).abs() < 1e-4);
    }

    #[test]
    fn closed_forms() {
        assert!((expected_edge_count(&unit(0.1)).unwrap() - 0.525_663_706_143_591_7).abs() < 1e-12);
        assert!((expected_edge_count(&unit(0.5)).unwrap() - 5.141_592_653_589_793).abs() < 1e-12);
        assert!(expected_edge_count(&unit(1e-12)).unwrap() < 1e-10);
        assert_eq!(same_color_probability(0.1, 0.0), 1.0);
        assert!((same_color_probability(0.1, 1e6) - 0.5).abs() < 1e-15);
        assert!((same_color_probability(0.1, 1.0) - 0.835_160_023_017_819).abs() < 1e-12);
        let wide = ArakParams::new(0.1, Rect::from_size(2.0, 1.0).unwrap()).unwrap();
        assert!(matches!(expected_edge_count(&wide), Err(Error::UnsupportedWindow(_))));
    }

    #[test]
    fn color_flip_leaves_density_unchanged() {
        let w = Rect::from_size(1.0, 1.0).unwrap();
        let ring = vec![Point2::new(0.1, 0.1), Point2::new(0.4, 0.15), Point2::new(0.2, 0.35)];
        let mut c = Coloring::from_polygons(w, Color::White, 0.5, &[ring]).unwrap();
        let before = unnormalized_log_density(&c, &unit(0.3));
        c.set_anchor_color(Color::Black);
        assert_eq!(unnormalized_log_density(&c, &unit(0.3)), before);
    }
}
