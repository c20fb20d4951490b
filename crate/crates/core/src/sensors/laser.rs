use super::{normal_log_pdf, LaserObs, LaserParams};
use crate::coloring::Coloring;
use crate::geometry::Point2;

/// Distance the beam would travel in `c`, and the edge it stops at. A beam
/// that meets no edge ends where it leaves the window or at its maximum
/// range, whichever comes first.
pub fn laser_expected_distance(o: &LaserObs, c: &Coloring) -> (f64, Option<u32>) {
    match c.index().ray_cast(o.origin(), o.direction(), o.max_range) {
        Some(hit) => (hit.distance, Some(hit.edge)),
        None => {
            let dir = Point2::from_polar(1.0, o.direction());
            (c.window().exit_distance(o.origin(), dir).min(o.max_range), None)
        }
    }
}

/// Log-likelihood of the reading when the beam's expected distance is
/// `expected` and the sensor sits in free space.
pub fn laser_log_likelihood_given(o: &LaserObs, expected: f64, p: &LaserParams) -> f64 {
    let sigma = p.sigma(expected);
    let mut l = p.w_gauss * normal_log_pdf(o.range, expected, sigma).exp() + p.w_uniform / o.max_range;
    if o.max_flag {
        l += p.w_maxrange;
    }
    l.ln()
}

/// Log-likelihood of one laser reading; `-inf` when the sensor would sit in
/// occupied space.
pub fn laser_log_likelihood(o: &LaserObs, c: &Coloring, p: &LaserParams) -> f64 {
    if c.color_at(o.origin()).is_black() {
        return f64::NEG_INFINITY;
    }
    laser_log_likelihood_given(o, laser_expected_distance(o, c).0, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::Color;
    use crate::geometry::{Pose, Rect};

    fn window() -> Rect {
        Rect::from_size(10.0, 10.0).unwrap()
    }

    fn wall_at(x: f64) -> Coloring {
        let ring = vec![
            Point2::new(x, 1.0),
            Point2::new(x + 1.0, 1.0),
            Point2::new(x + 1.0, 9.0),
            Point2::new(x, 9.0),
        ];
        let center = Color::White.flip_if((x..=x + 1.0).contains(&5.0));
        Coloring::from_polygons(window(), center, 0.5, &[ring]).unwrap()
    }

    fn beam(range: f64, flag: bool) -> LaserObs {
        LaserObs::new(Pose::new(3.0, 5.0, 0.0), 0.0, range, 8.0, flag).unwrap()
    }

    #[test]
    fn sensor_in_black_is_impossible() {
        let c = Coloring::new(window(), Color::Black);
        assert_eq!(laser_log_likelihood(&beam(2.0, false), &c, &LaserParams::default()), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_coloring_max_range_reading() {
        let p = LaserParams::default();
        let c = Coloring::new(Rect::from_size(30.0, 30.0).unwrap(), Color::White);
        let o = LaserObs::new(Pose::new(3.0, 15.0, 0.0), 0.0, 8.0, 8.0, true).unwrap();
        let want = (p.w_uniform / 8.0 + p.w_maxrange).ln();
        // The beam leaves the window 27 m away, so the Gaussian term vanishes.
        let l = laser_log_likelihood_given(&o, 27.0, &p);
        assert!((l - want).abs() < 1e-12);
        // Capped at max range the Gaussian term is centered on the reading.
        assert_eq!(laser_expected_distance(&o, &c), (8.0, None));
    }

    #[test]
    fn wall_distance_is_most_likely_reading() {
        let p = LaserParams::default();
        let c = wall_at(4.5);
        assert_eq!(laser_expected_distance(&beam(1.5, false), &c), (1.5, Some(3)));
        let best = laser_log_likelihood(&beam(1.5, false), &c, &p);
        for k in 1..400 {
            let r = 0.02 * k as f64;
            if r != 1.5 {
                assert!(laser_log_likelihood(&beam(r, false), &c, &p) < best);
            }
        }
    }

    #[test]
    fn monotone_in_error_near_the_peak() {
        let p = LaserParams::default();
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let r = 2.0 + 0.002 * k as f64;
            let l = laser_log_likelihood_given(&beam(r, false), 2.0, &p);
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn mixture_matches_direct_formula() {
        let p = LaserParams::default();
        let sigma: f64 = 0.02;
        let g = (-0.5 * (0.01f64 / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let want = (0.9 * g + 0.05 / 8.0).ln();
        assert!((laser_log_likelihood_given(&beam(2.01, false), 2.0, &p) - want).abs() < 1e-12);
    }
}
