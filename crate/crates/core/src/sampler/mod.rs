//! Metropolis–Hastings over polygonal colorings.

mod accumulator;
mod moves;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{AppliedEdit, Coloring};
use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::prior::ArakParams;

pub use accumulator::PosteriorAccumulator;
pub use moves::{build, draw_choice, inverse_choice, MoveChoice, MoveParams, MoveProposal, RejectReason};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    TriangleBirth,
    TriangleDeath,
    WedgeBirth,
    WedgeDeath,
    ChordBirth,
    ChordDeath,
    KinkBirth,
    KinkDeath,
    Relocate,
    BoundarySlide,
    SlideAlongEdge,
    RecolorQuad,
    LocalRecolor,
}

impl MoveKind {
    pub const ALL: [MoveKind; 13] = [
        MoveKind::TriangleBirth,
        MoveKind::TriangleDeath,
        MoveKind::WedgeBirth,
        MoveKind::WedgeDeath,
        MoveKind::ChordBirth,
        MoveKind::ChordDeath,
        MoveKind::KinkBirth,
        MoveKind::KinkDeath,
        MoveKind::Relocate,
        MoveKind::BoundarySlide,
        MoveKind::SlideAlongEdge,
        MoveKind::RecolorQuad,
        MoveKind::LocalRecolor,
    ];

    /// The kind that undoes this one.
    pub fn inverse(self) -> MoveKind {
        use MoveKind as K;
        match self {
            K::TriangleBirth => K::TriangleDeath,
            K::TriangleDeath => K::TriangleBirth,
            K::WedgeBirth => K::WedgeDeath,
            K::WedgeDeath => K::WedgeBirth,
            K::ChordBirth => K::ChordDeath,
            K::ChordDeath => K::ChordBirth,
            K::KinkBirth => K::KinkDeath,
            K::KinkDeath => K::KinkBirth,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        use MoveKind as K;
        match self {
            K::TriangleBirth => "triangle-birth",
            K::TriangleDeath => "triangle-death",
            K::WedgeBirth => "wedge-birth",
            K::WedgeDeath => "wedge-death",
            K::ChordBirth => "chord-birth",
            K::ChordDeath => "chord-death",
            K::KinkBirth => "kink-birth",
            K::KinkDeath => "kink-death",
            K::Relocate => "relocate",
            K::BoundarySlide => "boundary-slide",
            K::SlideAlongEdge => "slide-along-edge",
            K::RecolorQuad => "recolor-quad",
            K::LocalRecolor => "local-recolor",
        }
    }

    pub fn from_name(s: &str) -> Option<MoveKind> {
        MoveKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Probability of choosing each move kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveWeights([f64; 13]);

impl Default for MoveWeights {
    fn default() -> Self {
        let mut w = [0.08; 13];
        w[MoveKind::Relocate as usize] = 0.10;
        w[MoveKind::BoundarySlide as usize] = 0.05;
        w[MoveKind::SlideAlongEdge as usize] = 0.10;
        w[MoveKind::RecolorQuad as usize] = 0.03;
        w[MoveKind::LocalRecolor as usize] = 0.08;
        MoveWeights(w)
    }
}

impl MoveWeights {
    /// Weights must be non-negative, sum to one, and be equal within each
    /// birth/death pair.
    pub fn new(w: [f64; 13]) -> Result<Self> {
        if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::Config("move weights must be finite and non-negative".into()));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("move weights sum to {sum}, expected 1")));
        }
        for k in MoveKind::ALL {
            if w[k as usize] != w[k.inverse() as usize] {
                return Err(Error::Config(format!(
                    "{} and {} need equal weights",
                    k.name(),
                    k.inverse().name()
                )));
            }
        }
        Ok(MoveWeights(w))
    }

    pub fn get(&self, k: MoveKind) -> f64 {
        self.0[k as usize]
    }

    pub fn as_array(&self) -> [f64; 13] {
        self.0
    }

    pub fn sample(&self, rng: &mut impl Rng) -> MoveKind {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for k in MoveKind::ALL {
            acc += self.0[k as usize];
            if u < acc {
                return k;
            }
        }
        *MoveKind::ALL.iter().rev().find(|k| self.0[**k as usize] > 0.0).unwrap()
    }
}

/// Temperature as a function of progress through a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    Constant(f64),
    /// Geometric interpolation from `start` to `end`.
    Geometric { start: f64, end: f64 },
}

impl Schedule {
    pub fn temperature(&self, step: u64, total: u64) -> f64 {
        match *self {
            Schedule::Constant(t) => t,
            Schedule::Geometric { start, end } => {
                if total <= 1 {
                    return end;
                }
                let f = step as f64 / (total - 1) as f64;
                start * (end / start).powf(f.min(1.0))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub arak: ArakParams,
    pub weights: MoveWeights,
    /// Relocation radius, boundary slide half-width and kink half-width.
    pub delta: f64,
    pub schedule: Schedule,
    pub burn_in: u64,
    pub steps: u64,
    /// Retain one sample every `thin` steps after burn-in.
    pub thin: u64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(arak: ArakParams) -> Self {
        SamplerConfig {
            arak,
            weights: MoveWeights::default(),
            delta: 0.25,
            schedule: Schedule::Constant(1.0),
            burn_in: 0,
            steps: 0,
            thin: 1,
            seed: 0,
        }
    }

    pub fn move_params(&self) -> MoveParams<'_> {
        MoveParams {
            weights: &self.weights,
            delta: self.delta,
        }
    }

    /// Random source for chain number `chain`: the configured seed selects
    /// the key and the chain number selects the stream.
    pub fn rng(&self, chain: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chain);
        rng
    }
}

/// Data term of the posterior, maintained incrementally by a chain.
pub trait Likelihood {
    /// Change in log-likelihood if `applied`, already applied to `c`, is
    /// kept. May be `-inf`.
    fn propose(&mut self, c: &Coloring, applied: &AppliedEdit) -> f64;
    /// Keep the last proposed change.
    fn accept(&mut self, c: &Coloring, applied: &AppliedEdit);
    /// Drop the last proposed change.
    fn reject(&mut self);
    /// Current total log-likelihood.
    fn total(&self) -> f64;
}

/// The empty data set: the posterior equals the prior.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoData;

impl Likelihood for NoData {
    fn propose(&mut self, _: &Coloring, _: &AppliedEdit) -> f64 {
        0.0
    }
    fn accept(&mut self, _: &Coloring, _: &AppliedEdit) {}
    fn reject(&mut self) {}
    fn total(&self) -> f64 {
        0.0
    }
}

/// Log Metropolis–Hastings acceptance ratio. At zero temperature only the
/// sign of the posterior change matters.
pub fn acceptance_log_ratio(prior_delta: f64, likelihood_delta: f64, log_forward: f64, log_reverse: f64, t: f64) -> f64 {
    let d = prior_delta + likelihood_delta;
    if d.is_nan() || d == f64::NEG_INFINITY || log_reverse == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if t <= 0.0 {
        return if d > 0.0 {
            f64::INFINITY
        } else if d < 0.0 {
            f64::NEG_INFINITY
        } else {
            log_reverse - log_forward
        };
    }
    d / t + (log_reverse - log_forward)
}

/// Proposal and acceptance tallies for one move kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub proposed: u64,
    /// Rejected before evaluation: nothing to change, infeasible or
    /// irreversible choice.
    pub infeasible: u64,
    /// Rejected because the result broke a validity rule.
    pub invalid: u64,
    pub accepted: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounts(pub [KindCounts; 13]);

impl MoveCounts {
    pub fn get(&self, k: MoveKind) -> &KindCounts {
        &self.0[k as usize]
    }

    pub fn total_proposed(&self) -> u64 {
        self.0.iter().map(|c| c.proposed).sum()
    }

    pub fn total_accepted(&self) -> u64 {
        self.0.iter().map(|c| c.accepted).sum()
    }

    pub fn merge(&mut self, o: &MoveCounts) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            a.proposed += b.proposed;
            a.infeasible += b.infeasible;
            a.invalid += b.invalid;
            a.accepted += b.accepted;
        }
    }
}

/// What happened in one step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Rejected(MoveKind),
    Accepted(MoveKind, AppliedEdit),
}

// Running sums are recomputed from scratch this often to stop rounding drift.
const STATS_REFRESH_INTERVAL: u64 = 1 << 16;

/// One Markov chain: a coloring, its data term and a random stream.
#[derive(Clone, Debug)]
pub struct Chain<L> {
    pub coloring: Coloring,
    pub likelihood: L,
    pub counts: MoveCounts,
    arak: ArakParams,
    weights: MoveWeights,
    delta: f64,
    rng: ChaCha8Rng,
    steps: u64,
}

impl<L: Likelihood> Chain<L> {
    pub fn new(cfg: &SamplerConfig, coloring: Coloring, likelihood: L, chain: u64) -> Self {
        Chain {
            coloring,
            likelihood,
            counts: MoveCounts::default(),
            arak: cfg.arak,
            weights: cfg.weights.clone(),
            delta: cfg.delta,
            rng: cfg.rng(chain),
            steps: 0,
        }
    }

    pub fn log_prior(&self) -> f64 {
        self.arak.log_density_from_stats(self.coloring.stats())
    }

    pub fn log_posterior(&self) -> f64 {
        self.log_prior() + self.likelihood.total()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Propose one move at temperature `t` and accept or reject it.
    pub fn step(&mut self, t: f64) -> StepOutcome {
        self.steps += 1;
        if self.steps % STATS_REFRESH_INTERVAL == 0 {
            self.coloring.refresh_stats();
        }
        let kind = self.weights.sample(&mut self.rng);
        let counts = &mut self.counts.0[kind as usize];
        counts.proposed += 1;
        let mp = MoveParams {
            weights: &self.weights,
            delta: self.delta,
        };
        let prop = match draw_choice(kind, &self.coloring, &mp, &mut self.rng).and_then(|ch| build(&self.coloring, &mp, &ch)) {
            Ok(p) => p,
            Err(_) => {
                counts.infeasible += 1;
                return StepOutcome::Rejected(kind);
            }
        };
        let applied = match self.coloring.apply_checked(&prop.edit) {
            Ok(Ok(a)) => a,
            _ => {
                counts.invalid += 1;
                return StepOutcome::Rejected(kind);
            }
        };
        let prior_delta = self.arak.log_density_delta(&applied.delta);
        let lik_delta = self.likelihood.propose(&self.coloring, &applied);
        let r = acceptance_log_ratio(prior_delta, lik_delta, prop.log_forward, prop.log_reverse, t);
        let u: f64 = self.rng.random();
        if r >= 0.0 || u.ln() < r {
            self.likelihood.accept(&self.coloring, &applied);
            self.counts.0[kind as usize].accepted += 1;
            StepOutcome::Accepted(kind, applied)
        } else {
            self.likelihood.reject();
            self.coloring.revert(applied.token);
            StepOutcome::Rejected(kind)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub temperature: f64,
    pub log_prior: f64,
    pub log_likelihood: f64,
    pub edges: usize,
}

#[derive(Clone, Debug)]
pub struct ChainReport<L> {
    pub coloring: Coloring,
    pub likelihood: L,
    pub counts: MoveCounts,
    pub trace: Vec<TracePoint>,
}

/// Run burn-in and then sampling, feeding retained samples to `acc`.
pub fn run_chain<L: Likelihood>(
    cfg: &SamplerConfig,
    init: Coloring,
    likelihood: L,
    mut acc: Option<&mut PosteriorAccumulator>,
    chain: u64,
) -> ChainReport<L> {
    let mut ch = Chain::new(cfg, init, likelihood, chain);
    let total = cfg.burn_in + cfg.steps;
    let thin = cfg.thin.max(1);
    let mut trace = Vec::new();
    for i in 0..cfg.burn_in {
        ch.step(cfg.schedule.temperature(i, total));
    }
    if let Some(a) = acc.as_deref_mut() {
        a.attach(&ch.coloring);
    }
    for i in 0..cfg.steps {
        let t = cfg.schedule.temperature(cfg.burn_in + i, total);
        if let StepOutcome::Accepted(_, applied) = ch.step(t) {
            if let Some(a) = acc.as_deref_mut() {
                a.apply(&applied);
            }
        }
        if (i + 1) % thin == 0 {
            if let Some(a) = acc.as_deref_mut() {
                a.record_sample();
            }
            trace.push(TracePoint {
                step: cfg.burn_in + i + 1,
                temperature: t,
                log_prior: ch.log_prior(),
                log_likelihood: ch.likelihood.total(),
                edges: ch.coloring.edge_count(),
            });
        }
    }
    if let Some(a) = acc {
        a.detach();
    }
    ChainReport {
        coloring: ch.coloring,
        likelihood: ch.likelihood,
        counts: ch.counts,
        trace,
    }
}

/// Run several independent chains in parallel and merge their
/// accumulators.
pub fn run_chains<L: Likelihood + Clone + Send + Sync>(
    cfg: &SamplerConfig,
    init: &Coloring,
    likelihood: &L,
    grid: Option<GridSpec>,
    chains: u64,
) -> (Vec<ChainReport<L>>, Option<PosteriorAccumulator>) {
    let results: Vec<(ChainReport<L>, Option<PosteriorAccumulator>)> = (0..chains)
        .into_par_iter()
        .map(|k| {
            let mut acc = grid.map(PosteriorAccumulator::new);
            let rep = run_chain(cfg, init.clone(), likelihood.clone(), acc.as_mut(), k);
            (rep, acc)
        })
        .collect();
    let mut merged = grid.map(PosteriorAccumulator::new);
    let mut reports = Vec::with_capacity(results.len());
    for (rep, acc) in results {
        if let (Some(m), Some(a)) = (merged.as_mut(), acc.as_ref()) {
            m.merge(a).expect("chains share one grid");
        }
        reports.push(rep);
    }
    (reports, merged)
}

#[derive(Clone, Debug)]
pub struct AnnealReport {
    pub best: Coloring,
    pub best_log_posterior: f64,
    pub initial_log_posterior: f64,
    pub last: Coloring,
    pub counts: MoveCounts,
    pub trace: Vec<TracePoint>,
}

/// Simulated annealing over `burn_in + steps` steps following the schedule,
/// returning the best coloring visited.
pub fn anneal<L: Likelihood>(cfg: &SamplerConfig, init: Coloring, likelihood: L, chain: u64) -> AnnealReport {
    let mut ch = Chain::new(cfg, init, likelihood, chain);
    let total = cfg.burn_in + cfg.steps;
    let thin = cfg.thin.max(1);
    let initial = ch.log_posterior();
    let mut best = ch.coloring.clone();
    let mut best_lp = initial;
    let mut trace = Vec::new();
    for i in 0..total {
        let t = cfg.schedule.temperature(i, total);
        if let StepOutcome::Accepted(..) = ch.step(t) {
            let lp = ch.log_posterior();
            if lp > best_lp {
                best_lp = lp;
                best = ch.coloring.clone();
            }
        }
        if (i + 1) % thin == 0 {
            trace.push(TracePoint {
                step: i + 1,
                temperature: t,
                log_prior: ch.log_prior(),
                log_likelihood: ch.likelihood.total(),
                edges: ch.coloring.edge_count(),
            });
        }
    }
    AnnealReport {
        best,
        best_log_posterior: best_lp,
        initial_log_posterior: initial,
        last: ch.coloring,
        counts: ch.counts,
        trace,
    }
}
