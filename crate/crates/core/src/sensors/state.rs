use super::{
    laser_expected_distance, laser_log_likelihood_given, point_log_likelihood, sonar_log_likelihood_given,
    sonar_scene, LaserObs, Observation, ObservationIndex, SensorParams, SonarObs,
};
use crate::coloring::{AppliedEdit, Color, Coloring};
use crate::error::Result;
use crate::geometry::{point_in_polygon, ray_segment_hit, CellCoord, GridSpec, Point2, Segment};
use crate::sampler::Likelihood;

// Extents are padded by this much so an edge ending exactly on one is still
// found through the grid.
const EXTENT_SLACK: f64 = 1e-6;

// Cached sums are rebuilt from per-observation values this often.
const RESUM_INTERVAL: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cached {
    ll: f64,
    /// Color at the observation's origin.
    origin: Color,
    /// Laser: edge the beam stops at.
    hit: Option<u32>,
    /// Laser: expected distance; sonar: scene extent; zero when the origin
    /// is black.
    reach: f64,
}

/// Running sum of log-likelihoods that tolerates `-inf` terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Total {
    finite: f64,
    impossible: i64,
}

impl Total {
    fn add(&mut self, ll: f64, sign: f64) {
        if ll == f64::NEG_INFINITY {
            self.impossible += sign as i64;
        } else {
            self.finite += sign * ll;
        }
    }

    fn value(&self) -> f64 {
        if self.impossible > 0 {
            f64::NEG_INFINITY
        } else {
            self.finite
        }
    }
}

/// Data term of the posterior for a fixed set of observations, kept in step
/// with a chain's coloring.
///
/// Every observation caches its log-likelihood and is listed in an
/// [`ObservationIndex`]. After an edit only observations whose extent meets a
/// changed edge, or whose origin changed color, are re-evaluated.
#[derive(Clone, Debug)]
pub struct LikelihoodState {
    params: SensorParams,
    observations: Vec<Observation>,
    index: ObservationIndex,
    cache: Vec<Cached>,
    total: Total,
    pending: Vec<(u32, Cached)>,
    accepted: u64,
    evaluations: u64,
}

fn laser_extent(o: &LaserObs, reach: f64) -> Segment {
    let dir = Point2::from_polar(1.0, o.direction());
    Segment::new(o.origin(), o.origin() + dir * (reach + EXTENT_SLACK))
}

fn sonar_extent_cells(o: &SonarObs, reach: f64, grid: &GridSpec) -> Vec<CellCoord> {
    let cone = o.cone().expect("sonar observations carry a valid cone");
    grid.cells_overlapping_convex(&cone.enclosing_polygon(reach * (1.0 + 1e-9) + EXTENT_SLACK))
}

impl LikelihoodState {
    /// Evaluate every observation against `c`.
    pub fn new(c: &Coloring, observations: Vec<Observation>, params: SensorParams) -> Result<Self> {
        params.validate()?;
        let grid = *c.index().grid();
        let origins = observations.iter().map(|o| o.origin()).collect();
        let mut s = LikelihoodState {
            params,
            observations,
            index: ObservationIndex::new(grid, origins),
            cache: Vec::new(),
            total: Total::default(),
            pending: Vec::new(),
            accepted: 0,
            evaluations: 0,
        };
        s.cache = (0..s.observations.len())
            .map(|i| {
                let o = &s.observations[i];
                s.evaluate(o, c, c.color_at(o.origin()))
            })
            .collect();
        for i in 0..s.cache.len() {
            s.reindex(i as u32);
            s.total.add(s.cache[i].ll, 1.0);
        }
        Ok(s)
    }

    pub fn params(&self) -> &SensorParams {
        &self.params
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn index(&self) -> &ObservationIndex {
        &self.index
    }

    /// Cached log-likelihood of each observation.
    pub fn log_likelihoods(&self) -> impl Iterator<Item = f64> + '_ {
        self.cache.iter().map(|c| c.ll)
    }

    /// Number of single-observation evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn evaluate(&self, o: &Observation, c: &Coloring, origin: Color) -> Cached {
        let mut out = Cached {
            ll: f64::NEG_INFINITY,
            origin,
            hit: None,
            reach: 0.0,
        };
        match o {
            Observation::Point(p) => out.ll = point_log_likelihood(p, origin),
            _ if origin.is_black() => {}
            Observation::Laser(l) => {
                let (d, hit) = laser_expected_distance(l, c);
                out.ll = laser_log_likelihood_given(l, d, &self.params.laser);
                out.hit = hit;
                out.reach = d;
            }
            Observation::Sonar(s) => {
                let scene = sonar_scene(s, c, &self.params.sonar);
                out.ll = sonar_log_likelihood_given(s, &scene, &self.params.sonar);
                out.reach = scene.extent;
            }
        }
        out
    }

    fn reindex(&mut self, i: u32) {
        let cached = self.cache[i as usize];
        let grid = *self.index.grid();
        let cells = match &self.observations[i as usize] {
            _ if cached.origin.is_black() => Vec::new(),
            Observation::Point(_) => Vec::new(),
            Observation::Laser(l) => grid.trace_segment(&laser_extent(l, cached.reach)),
            Observation::Sonar(s) => sonar_extent_cells(s, cached.reach, &grid),
        };
        self.index.set_extent(i, cells);
    }

    /// Whether `applied` can change observation `i`, besides a color change
    /// at its origin.
    fn sees_change(&self, i: u32, applied: &AppliedEdit) -> bool {
        let cached = &self.cache[i as usize];
        if cached.origin.is_black() {
            return false;
        }
        match &self.observations[i as usize] {
            Observation::Point(_) => false,
            Observation::Laser(l) => {
                if cached.hit.is_some_and(|h| applied.removed.iter().any(|&(e, _)| e == h)) {
                    return true;
                }
                let dir = Point2::from_polar(1.0, l.direction());
                let reach = cached.reach + EXTENT_SLACK;
                applied.added.iter().any(|(_, s)| ray_segment_hit(l.origin(), dir, reach, s).is_some())
            }
            Observation::Sonar(s) => {
                let cone = s.cone().expect("sonar observations carry a valid cone");
                let reach = cached.reach * (1.0 + 1e-9) + EXTENT_SLACK;
                applied
                    .removed
                    .iter()
                    .chain(&applied.added)
                    .any(|(_, seg)| cone.clip_params(seg, reach).is_some())
            }
        }
    }

    /// Log-likelihood of every observation recomputed from scratch.
    pub fn recompute_total(&self, c: &Coloring) -> f64 {
        let mut t = Total::default();
        for o in &self.observations {
            t.add(self.evaluate(o, c, c.color_at(o.origin())).ll, 1.0);
        }
        t.value()
    }

    /// Observations whose cached value, origin color or index entry differs
    /// from a fresh evaluation against `c`.
    pub fn stale_observations(&self, c: &Coloring) -> Vec<u32> {
        let grid = *self.index.grid();
        let mut fresh = LikelihoodState {
            index: ObservationIndex::new(grid, self.observations.iter().map(|o| o.origin()).collect()),
            ..self.clone()
        };
        let mut out = Vec::new();
        for i in 0..self.observations.len() {
            let o = &self.observations[i];
            fresh.cache[i] = self.evaluate(o, c, c.color_at(o.origin()));
            fresh.reindex(i as u32);
            let (a, b) = (&self.cache[i], &fresh.cache[i]);
            let same_ll = a.ll == b.ll || (a.ll - b.ll).abs() <= 1e-9 * (1.0 + b.ll.abs());
            if !same_ll || a.origin != b.origin || self.index.extent_cells(i as u32) != fresh.index.extent_cells(i as u32)
            {
                out.push(i as u32);
            }
        }
        out
    }
}

impl Likelihood for LikelihoodState {
    fn propose(&mut self, c: &Coloring, applied: &AppliedEdit) -> f64 {
        self.pending.clear();
        let mut delta = Total::default();
        for i in self.index.affected_observations(applied) {
            let cached = self.cache[i as usize];
            let flips = point_in_polygon(self.observations[i as usize].origin(), &applied.region);
            if !flips && !self.sees_change(i, applied) {
                continue;
            }
            let new = self.evaluate(&self.observations[i as usize], c, cached.origin.flip_if(flips));
            self.evaluations += 1;
            if new.ll != cached.ll {
                delta.add(cached.ll, -1.0);
                delta.add(new.ll, 1.0);
            }
            self.pending.push((i, new));
        }
        let before = self.total.impossible;
        let after = before + delta.impossible;
        match (before > 0, after > 0) {
            (false, true) => f64::NEG_INFINITY,
            (true, false) => f64::INFINITY,
            _ if after < before => f64::INFINITY,
            _ if after > before => f64::NEG_INFINITY,
            _ => delta.finite,
        }
    }

    fn accept(&mut self, _: &Coloring, _: &AppliedEdit) {
        for (i, new) in std::mem::take(&mut self.pending) {
            let old = self.cache[i as usize];
            self.total.add(old.ll, -1.0);
            self.total.add(new.ll, 1.0);
            self.cache[i as usize] = new;
            if old.reach != new.reach || old.origin != new.origin {
                self.reindex(i);
            }
        }
        self.accepted += 1;
        if self.accepted % RESUM_INTERVAL == 0 {
            let mut t = Total::default();
            for c in &self.cache {
                t.add(c.ll, 1.0);
            }
            self.total = t;
        }
    }

    fn reject(&mut self) {
        self.pending.clear();
    }

    fn total(&self) -> f64 {
        self.total.value()
    }
}
