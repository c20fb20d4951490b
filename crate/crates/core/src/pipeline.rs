//! End-to-end runs shared by the command line and the bindings: posterior
//! rasters, annealed maps and occupancy-grid baselines from a set of
//! observations and a [`RunConfig`].

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::baseline::build_occupancy_grid;
use crate::coloring::{Color, Coloring};
use crate::error::Result;
use crate::geometry::Rect;
use crate::io::RunConfig;
use crate::raster::Raster;
use crate::sampler::{anneal, run_chain, AnnealReport, MoveCounts, MoveKind, PosteriorAccumulator, TracePoint};
use crate::sensors::{LikelihoodState, Observation};

/// Warm-up annealing for chain `k` draws from stream `WARMUP_STREAM + k`,
/// sampling from stream `k`.
pub const WARMUP_STREAM: u64 = 1 << 63;

/// What one posterior chain did.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSummary {
    pub chain: u64,
    pub counts: MoveCounts,
    pub trace: Vec<TracePoint>,
    pub final_edges: usize,
}

#[derive(Clone, Debug)]
pub struct PosteriorRun {
    /// Fraction of samples in which each cell center was black.
    pub p_black: Raster,
    /// Fraction of samples in which each cell was entirely white.
    pub p_cell_white: Raster,
    pub samples: u64,
    pub chains: Vec<ChainSummary>,
    /// Proposals made, warm-up included.
    pub proposals: u64,
    pub seconds: f64,
}

fn blank(window: Rect, cfg: &RunConfig) -> Result<Coloring> {
    Coloring::with_index_cell(window, Color::White, cfg.index_cell)
}

/// Run `cfg.chains` posterior chains in parallel and merge their
/// accumulators. Every chain starts from the all-white coloring, optionally
/// annealed for `cfg.warmup_steps` steps first.
pub fn sample_posterior(cfg: &RunConfig, window: Rect, obs: &[Observation]) -> Result<PosteriorRun> {
    let sampler = cfg.sampler(window)?;
    let warm = cfg.annealer(window, cfg.warmup_steps)?;
    let grid = cfg.grid(window)?;
    let start = Instant::now();
    let init = blank(window, cfg)?;
    let lik = LikelihoodState::new(&init, obs.to_vec(), cfg.sensors())?;
    let runs: Vec<(ChainSummary, PosteriorAccumulator, u64)> = (0..cfg.chains)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let (first, lik, warm_proposals) = if cfg.warmup_steps > 0 {
                let rep = anneal(&warm, init.clone(), lik.clone(), WARMUP_STREAM + k);
                let lik = LikelihoodState::new(&rep.best, obs.to_vec(), cfg.sensors())?;
                (rep.best, lik, rep.counts.total_proposed())
            } else {
                (init.clone(), lik.clone(), 0)
            };
            let mut acc = PosteriorAccumulator::new(grid);
            let rep = run_chain(&sampler, first, lik, Some(&mut acc), k);
            let summary = ChainSummary {
                chain: k,
                final_edges: rep.coloring.edge_count(),
                counts: rep.counts,
                trace: rep.trace,
            };
            Ok((summary, acc, warm_proposals))
        })
        .collect::<Result<_>>()?;
    let mut merged = PosteriorAccumulator::new(grid);
    let mut chains = Vec::new();
    let mut proposals = 0;
    for (s, acc, w) in runs {
        merged.merge(&acc)?;
        proposals += w + s.counts.total_proposed();
        chains.push(s);
    }
    let (p_black, p_cell_white) = if merged.samples() == 0 {
        (Raster::filled(grid, 0.5), Raster::filled(grid, 0.5))
    } else {
        (Raster::new(grid, merged.black_fraction())?, Raster::new(grid, merged.white_fraction())?)
    };
    Ok(PosteriorRun {
        p_black,
        p_cell_white,
        samples: merged.samples(),
        chains,
        proposals,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug)]
pub struct MapRun {
    pub report: AnnealReport,
    pub seconds: f64,
}

impl MapRun {
    pub fn proposals_per_second(&self) -> f64 {
        self.report.counts.total_proposed() as f64 / self.seconds.max(1e-9)
    }
}

/// Anneal from the all-white coloring for `cfg.anneal_steps` steps.
pub fn estimate_map(cfg: &RunConfig, window: Rect, obs: &[Observation]) -> Result<MapRun> {
    let sampler = cfg.annealer(window, cfg.anneal_steps)?;
    let init = blank(window, cfg)?;
    let lik = LikelihoodState::new(&init, obs.to_vec(), cfg.sensors())?;
    let start = Instant::now();
    let report = anneal(&sampler, init, lik, 0);
    Ok(MapRun {
        report,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Occupancy probabilities of the baseline grid mapper.
pub fn baseline_raster(cfg: &RunConfig, window: Rect, obs: &[Observation]) -> Result<Raster> {
    cfg.validate()?;
    let grid = cfg.grid(window)?;
    Raster::new(grid, build_occupancy_grid(grid, cfg.baseline, obs).probabilities())
}

fn write_counts(out: &mut String, counts: &MoveCounts) {
    writeln!(out, "{:<18} {:>10} {:>10} {:>10} {:>10} {:>8}", "kind", "proposed", "infeasible", "invalid", "accepted", "rate").unwrap();
    for k in MoveKind::ALL {
        let c = counts.get(k);
        let rate = if c.proposed > 0 { c.accepted as f64 / c.proposed as f64 } else { 0.0 };
        writeln!(
            out,
            "{:<18} {:>10} {:>10} {:>10} {:>10} {:>8.4}",
            k.name(),
            c.proposed,
            c.infeasible,
            c.invalid,
            c.accepted,
            rate
        )
        .unwrap();
    }
}

fn write_trace(out: &mut String, trace: &[TracePoint]) {
    writeln!(out, "{:>12} {:>10} {:>14} {:>14} {:>6}", "step", "T", "log_prior", "log_lik", "edges").unwrap();
    for t in trace {
        writeln!(
            out,
            "{:>12} {:>10.4} {:>14.4} {:>14.4} {:>6}",
            t.step, t.temperature, t.log_prior, t.log_likelihood, t.edges
        )
        .unwrap();
    }
}

/// Plain-text chain report: per-kind counts and the log-posterior trace of
/// every chain.
pub fn posterior_report(run: &PosteriorRun) -> String {
    let mut out = String::new();
    writeln!(out, "samples {}", run.samples).unwrap();
    writeln!(out, "proposals {}", run.proposals).unwrap();
    writeln!(out, "seconds {:.3}", run.seconds).unwrap();
    writeln!(out, "proposals_per_second {:.1}", run.proposals as f64 / run.seconds.max(1e-9)).unwrap();
    for c in &run.chains {
        writeln!(out, "\n[chain {}] final edges {}", c.chain, c.final_edges).unwrap();
        write_counts(&mut out, &c.counts);
        writeln!(out).unwrap();
        write_trace(&mut out, &c.trace);
    }
    out
}

/// Plain-text annealing report.
pub fn map_report(run: &MapRun) -> String {
    let r = &run.report;
    let mut out = String::new();
    writeln!(out, "initial_log_posterior {:.6}", r.initial_log_posterior).unwrap();
    writeln!(out, "best_log_posterior {:.6}", r.best_log_posterior).unwrap();
    writeln!(out, "best_edges {}", r.best.edge_count()).unwrap();
    writeln!(out, "seconds {:.3}", run.seconds).unwrap();
    writeln!(out, "proposals_per_second {:.1}\n", run.proposals_per_second()).unwrap();
    write_counts(&mut out, &r.counts);
    writeln!(out).unwrap();
    write_trace(&mut out, &r.trace);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::sensors::LaserObs;

    fn small() -> RunConfig {
        RunConfig {
            burn_in: 200,
            steps: 2000,
            thin: 10,
            anneal_steps: 2000,
            cell_size: 0.25,
            ..Default::default()
        }
    }

    #[test]
    fn no_steps_leaves_prior_grey() {
        let cfg = RunConfig {
            burn_in: 0,
            steps: 0,
            ..small()
        };
        let w = Rect::from_size(2.0, 2.0).unwrap();
        let run = sample_posterior(&cfg, w, &[]).unwrap();
        assert_eq!(run.samples, 0);
        assert!(run.p_black.values.iter().all(|&v| v == 0.5));
        assert_eq!(run.chains[0].final_edges, 0);
    }

    #[test]
    fn chains_merge_and_repeat() {
        let cfg = RunConfig {
            chains: 3,
            warmup_steps: 300,
            ..small()
        };
        let w = Rect::from_size(2.0, 2.0).unwrap();
        let obs = [Observation::Laser(LaserObs::new(Pose::new(0.5, 1.0, 0.0), 0.0, 1.0, 3.0, false).unwrap())];
        let a = sample_posterior(&cfg, w, &obs).unwrap();
        let b = sample_posterior(&cfg, w, &obs).unwrap();
        assert_eq!(a.samples, 3 * 200);
        assert_eq!(a.p_black, b.p_black);
        assert_eq!(a.p_cell_white, b.p_cell_white);
        assert_eq!(a.chains, b.chains);
        assert_eq!(a.proposals, 3 * (300 + 2200));
        let text = posterior_report(&a);
        assert!(text.contains("[chain 2]") && text.contains("local-recolor"));
    }

    #[test]
    fn map_run_reports() {
        let w = Rect::from_size(2.0, 2.0).unwrap();
        let run = estimate_map(&small(), w, &[]).unwrap();
        assert!(run.report.best_log_posterior >= run.report.initial_log_posterior);
        assert!(map_report(&run).contains("best_edges"));
    }
}
