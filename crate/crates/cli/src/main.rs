use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polymap::coloring::Coloring;
use polymap::diagnostics::{check_prior_statistics, prior_statistics, PriorRun};
use polymap::io::{write_raster, RasterSidecar, RunConfig, ScanLog};
use polymap::pipeline::{baseline_raster, estimate_map, map_report, posterior_report, sample_posterior};
use polymap::raster::Raster;
use polymap::sensors::SensorParams;
use polymap::sim::{make_world, simulate_trajectory, Layout, LaserRig, SonarRig, WorldSpec};

/// Environment variable naming the default configuration file.
const CONFIG_ENV: &str = "POLYMAP_CONFIG";

#[derive(Parser)]
#[command(name = "polymap", version, about = "Occupancy mapping with polygonal random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a robot surveying a synthetic building.
    Simulate(SimulateArgs),
    /// Sample the posterior and write occupancy rasters.
    Sample(RunArgs),
    /// Anneal to a single polygonal map.
    Map(RunArgs),
    /// Build an occupancy-grid map for comparison.
    Baseline(RunArgs),
    /// Check prior chains against the closed-form statistics.
    PriorStats(PriorStatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Sensors {
    Laser,
    Sonar,
    Both,
}

#[derive(Args)]
struct SimulateArgs {
    /// corridor, rooms-off-hallway or lobby.
    #[arg(long, default_value = "corridor")]
    world: String,
    #[arg(long, value_enum, default_value = "laser")]
    sensors: Sensors,
    /// Distance between scan poses, meters.
    #[arg(long, default_value_t = 0.75)]
    spacing: f64,
    /// Seed for the sensor noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed for door and pillar placement.
    #[arg(long, default_value_t = 0)]
    world_seed: u64,
    #[arg(long, default_value_t = 180)]
    laser_beams: u32,
    /// Physical sonar range; readings past 3.5 m are logged as max-range.
    #[arg(long, default_value_t = 3.5)]
    sonar_sensor_range: f64,
    /// Writes <out>.log and <out>.truth.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file; defaults to the file named by POLYMAP_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. --set p=0.2.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let path = self.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let mut cfg = match &path {
            Some(p) => RunConfig::read(p).with_context(|| format!("reading config {}", p.display()))?,
            None => RunConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.chains {
            cfg.chains = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scan log to read.
    log: PathBuf,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PriorStatsArgs {
    #[arg(long, default_value_t = 500_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 2_000_000)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    chains: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn ensure_parent(prefix: &Path) -> Result<()> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let Some(layout) = Layout::from_name(&a.world) else {
        bail!("unknown world {:?}; expected corridor, rooms-off-hallway or lobby", a.world);
    };
    let spec = WorldSpec {
        seed: a.world_seed,
        ..WorldSpec::new(layout)
    };
    let world = make_world(&spec)?;
    let laser = matches!(a.sensors, Sensors::Laser | Sensors::Both).then(|| LaserRig {
        beams: a.laser_beams,
        ..Default::default()
    });
    let sonar = matches!(a.sensors, Sensors::Sonar | Sensors::Both).then(|| SonarRig {
        sensor_range: a.sonar_sensor_range,
        ..Default::default()
    });
    let traj = world.trajectory(a.spacing, laser, sonar);
    let records = simulate_trajectory(&world.truth, &traj, &SensorParams::default(), a.seed)?;
    let log = ScanLog::from_records(Some(*world.truth.window()), records)?;
    ensure_parent(&a.out)?;
    log.write(&with_suffix(&a.out, ".log"))?;
    std::fs::write(with_suffix(&a.out, ".truth.json"), world.truth.to_json()?)?;
    eprintln!("wrote {} readings", log.records.len());
    Ok(())
}

fn load(a: &RunArgs) -> Result<(RunConfig, ScanLog, polymap::geometry::Rect)> {
    let cfg = a.config.resolve()?;
    let log = ScanLog::read(&a.log).with_context(|| format!("reading log {}", a.log.display()))?;
    let window = cfg.window_or(log.window)?;
    ensure_parent(&a.out)?;
    Ok((cfg, log, window))
}

fn sidecar(r: &Raster, quantity: &str, samples: u64, chains: u64) -> RasterSidecar {
    RasterSidecar {
        grid: r.grid,
        quantity: quantity.into(),
        samples,
        chains,
    }
}

fn sample(a: &RunArgs) -> Result<()> {
    let (cfg, log, window) = load(a)?;
    let run = sample_posterior(&cfg, window, &log.observations())?;
    let chains = cfg.chains;
    write_raster(
        &with_suffix(&a.out, ".black"),
        &run.p_black,
        &sidecar(&run.p_black, "p_black", run.samples, chains),
    )?;
    // Pixels are bright where the cell is likely entirely free.
    let not_white = Raster::new(run.p_cell_white.grid, run.p_cell_white.values.iter().map(|v| 1.0 - v).collect())?;
    write_raster(
        &with_suffix(&a.out, ".white"),
        &not_white,
        &sidecar(&not_white, "p_cell_white", run.samples, chains),
    )?;
    std::fs::write(with_suffix(&a.out, ".report.txt"), posterior_report(&run))?;
    eprintln!(
        "{} samples from {} chains, {:.0} proposals/s",
        run.samples,
        chains,
        run.proposals as f64 / run.seconds.max(1e-9)
    );
    Ok(())
}

fn map(a: &RunArgs) -> Result<()> {
    let (cfg, log, window) = load(a)?;
    let run = estimate_map(&cfg, window, &log.observations())?;
    let best = &run.report.best;
    let violations = best.validate();
    if !violations.is_empty() {
        bail!("annealed map is invalid: {violations:?}");
    }
    let json = best.to_json()?;
    if Coloring::from_json(&json)?.to_map() != best.to_map() {
        bail!("exported map does not re-import identically");
    }
    std::fs::write(with_suffix(&a.out, ".json"), json)?;
    let raster = Raster::from_coloring(best, cfg.grid(window)?);
    write_raster(&a.out, &raster, &sidecar(&raster, "map_black", 1, 1))?;
    std::fs::write(with_suffix(&a.out, ".report.txt"), map_report(&run))?;
    eprintln!(
        "map with {} edges, log posterior {:.3}, {:.0} proposals/s",
        best.edge_count(),
        run.report.best_log_posterior,
        run.proposals_per_second()
    );
    Ok(())
}

fn baseline(a: &RunArgs) -> Result<()> {
    let (cfg, log, window) = load(a)?;
    let r = baseline_raster(&cfg, window, &log.observations())?;
    write_raster(&a.out, &r, &sidecar(&r, "p_occupied", log.records.len() as u64, 0))?;
    Ok(())
}

fn prior_stats(a: &PriorStatsArgs) -> Result<bool> {
    let mut pass = true;
    for p in [0.25, 0.5] {
        let run = PriorRun {
            chains: a.chains,
            seed: a.seed,
            ..PriorRun::unit_square(p, a.burn_in, a.steps)
        };
        let stats = prior_statistics(&run)?;
        for check in check_prior_statistics(&stats, &run.window) {
            println!("{check}");
            pass &= check.pass;
        }
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Sample(a) => sample(a).map(|_| true),
        Command::Map(a) => map(a).map(|_| true),
        Command::Baseline(a) => baseline(a).map(|_| true),
        Command::PriorStats(a) => prior_stats(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
