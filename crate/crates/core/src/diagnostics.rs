//! Empirical statistics of prior-only chains, for comparison against the
//! closed forms in [`crate::prior`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coloring::{Color, Coloring};
use crate::error::Result;
use crate::geometry::{Point2, Rect};
use crate::prior::{expected_edge_count, same_color_probability, ArakParams};
use crate::sampler::{Chain, NoData, SamplerConfig};

/// How to run a prior-statistics chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorRun {
    pub p: f64,
    pub window: Rect,
    pub burn_in: u64,
    pub steps: u64,
    /// Statistics are recorded every `thin` steps.
    pub thin: u64,
    /// Separations at which same-color frequencies are measured.
    pub distances: Vec<f64>,
    /// Random point pairs drawn per distance at each recording.
    pub pairs_per_sample: u32,
    pub seed: u64,
    /// Independent chains, each running the full budget.
    pub chains: u64,
}

impl PriorRun {
    /// Unit-square run at scale `p` with the given budget.
    pub fn unit_square(p: f64, burn_in: u64, steps: u64) -> Self {
        PriorRun {
            p,
            window: Rect::from_size(1.0, 1.0).expect("unit square"),
            burn_in,
            steps,
            thin: 20,
            distances: vec![0.05, 0.1, 0.2, 0.4],
            pairs_per_sample: 4,
            seed: 0,
            chains: 1,
        }
    }
}

/// Same-color frequency at one separation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairFrequency {
    pub distance: f64,
    pub same: u64,
    pub pairs: u64,
}

impl PairFrequency {
    pub fn fraction(&self) -> f64 {
        self.same as f64 / self.pairs as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriorStats {
    pub p: f64,
    pub samples: u64,
    pub mean_edges: f64,
    /// Standard error of `mean_edges` from batch means.
    pub mean_edges_stderr: f64,
    pub pairs: Vec<PairFrequency>,
    pub proposals: u64,
    pub accepted: u64,
}

const BATCHES: usize = 20;

/// Two points `d` apart, both inside `w`.
fn random_pair(w: &Rect, d: f64, rng: &mut impl Rng) -> (Point2, Point2) {
    loop {
        let a = Point2::new(rng.random_range(w.min.x..w.max.x), rng.random_range(w.min.y..w.max.y));
        let b = a + Point2::from_polar(d, rng.random_range(0.0..std::f64::consts::TAU));
        if w.contains(b) {
            return (a, b);
        }
    }
}

struct ChainTally {
    edges: Vec<f64>,
    same: Vec<u64>,
    pairs: Vec<u64>,
    proposals: u64,
    accepted: u64,
}

fn run_one(run: &PriorRun, chain: u64) -> Result<ChainTally> {
    let mut cfg = SamplerConfig::new(ArakParams::new(run.p, run.window)?);
    cfg.seed = run.seed;
    let mut ch = Chain::new(&cfg, Coloring::new(run.window, Color::White), NoData, chain);
    // Pair placement has its own stream so the chain itself matches any
    // other run with the same seed.
    let mut pair_rng = ChaCha8Rng::seed_from_u64(run.seed ^ 0x5eed_0f_9a1e);
    pair_rng.set_stream(chain);
    for _ in 0..run.burn_in {
        ch.step(1.0);
    }
    let thin = run.thin.max(1);
    let mut t = ChainTally {
        edges: Vec::new(),
        same: vec![0; run.distances.len()],
        pairs: vec![0; run.distances.len()],
        proposals: 0,
        accepted: 0,
    };
    for i in 0..run.steps {
        ch.step(1.0);
        if (i + 1) % thin == 0 {
            t.edges.push(ch.coloring.edge_count() as f64);
            for (k, &d) in run.distances.iter().enumerate() {
                for _ in 0..run.pairs_per_sample {
                    let (a, b) = random_pair(&run.window, d, &mut pair_rng);
                    t.same[k] += (ch.coloring.color_at(a) == ch.coloring.color_at(b)) as u64;
                    t.pairs[k] += 1;
                }
            }
        }
    }
    t.proposals = ch.counts.total_proposed();
    t.accepted = ch.counts.total_accepted();
    Ok(t)
}

/// Run the chains of `run` and pool their statistics.
pub fn prior_statistics(run: &PriorRun) -> Result<PriorStats> {
    let tallies: Vec<ChainTally> = (0..run.chains.max(1))
        .into_par_iter()
        .map(|c| run_one(run, c))
        .collect::<Result<_>>()?;
    let mut batch_means = Vec::new();
    let mut all = Vec::new();
    for t in &tallies {
        let size = (t.edges.len() / BATCHES).max(1);
        batch_means.extend(t.edges.chunks(size).filter(|b| b.len() == size).map(|b| b.iter().sum::<f64>() / size as f64));
        all.extend_from_slice(&t.edges);
    }
    let n = all.len().max(1) as f64;
    let mean = all.iter().sum::<f64>() / n;
    let nb = batch_means.len() as f64;
    let bm = batch_means.iter().sum::<f64>() / nb;
    let var = batch_means.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (nb - 1.0).max(1.0);
    let pairs = run
        .distances
        .iter()
        .enumerate()
        .map(|(k, &distance)| PairFrequency {
            distance,
            same: tallies.iter().map(|t| t.same[k]).sum(),
            pairs: tallies.iter().map(|t| t.pairs[k]).sum(),
        })
        .collect();
    Ok(PriorStats {
        p: run.p,
        samples: all.len() as u64,
        mean_edges: mean,
        mean_edges_stderr: (var / nb).sqrt(),
        pairs,
        proposals: tallies.iter().map(|t| t.proposals).sum(),
        accepted: tallies.iter().map(|t| t.accepted).sum(),
    })
}

/// One line of a prior-statistics report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: observed {:.4}, expected {:.4} (tolerance {:.4})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.expected,
            self.tolerance
        )
    }
}

/// Compare `stats` with the closed forms: mean edge count within 5%
/// (unit square only) and same-color frequencies within 0.02.
pub fn check_prior_statistics(stats: &PriorStats, window: &Rect) -> Vec<Check> {
    let mut out = Vec::new();
    if let Ok(expected) = ArakParams::new(stats.p, *window).and_then(|a| expected_edge_count(&a)) {
        let tolerance = 0.05 * expected;
        out.push(Check {
            name: format!("mean edge count, p={}", stats.p),
            observed: stats.mean_edges,
            expected,
            tolerance,
            pass: (stats.mean_edges - expected).abs() <= tolerance,
        });
    }
    for pf in &stats.pairs {
        let expected = same_color_probability(stats.p, pf.distance);
        out.push(Check {
            name: format!("same color, p={} d={}", stats.p, pf.distance),
            observed: pf.fraction(),
            expected,
            tolerance: 0.02,
            pass: (pf.fraction() - expected).abs() <= 0.02,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_inside_and_at_distance() {
        let w = Rect::from_size(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b) = random_pair(&w, 0.4, &mut rng);
            assert!(w.contains(a) && w.contains(b));
            assert!((a.dist(b) - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn short_run_is_deterministic_and_sane() {
        let mut run = PriorRun::unit_square(0.5, 1000, 20_000);
        run.chains = 2;
        let a = prior_statistics(&run).unwrap();
        let b = prior_statistics(&run).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 2 * 1000);
        assert_eq!(a.proposals, 2 * 21_000);
        assert!(a.mean_edges > 0.0 && a.mean_edges < 50.0);
        for pf in &a.pairs {
            assert_eq!(pf.pairs, 2 * 1000 * 4);
            assert!(pf.fraction() >= 0.3);
        }
        let checks = check_prior_statistics(&a, &run.window);
        assert_eq!(checks.len(), 5);
    }

    #[test]
    fn checks_report_failures() {
        let stats = PriorStats {
            p: 0.5,
            samples: 1,
            mean_edges: 1.0,
            mean_edges_stderr: 0.0,
            pairs: vec![PairFrequency {
                distance: 0.1,
                same: 90,
                pairs: 100,
            }],
            proposals: 0,
            accepted: 0,
        };
        let checks = check_prior_statistics(&stats, &Rect::from_size(1.0, 1.0).unwrap());
        assert!(!checks[0].pass);
        assert!(checks[1].pass);
        assert!(checks[0].to_string().starts_with("FAIL mean edge count"));
    }
}
