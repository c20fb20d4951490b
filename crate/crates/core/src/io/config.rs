use std::fmt::Write as _;

use crate::baseline::{BaselineParams, DEFAULT_BASELINE_CELL};
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Point2, Rect};
use crate::prior::ArakParams;
use crate::sampler::{MoveKind, MoveWeights, SamplerConfig, Schedule};
use crate::sensors::{LaserParams, SensorParams, SonarParams};

/// Every tunable of a run, read from `key=value` text.
///
/// Blank lines and text after `#` are ignored. Unknown keys are errors.
/// [`RunConfig::to_text`] lists every key with its current value, so the
/// defaults can be printed with `RunConfig::default().to_text()`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Arak scale parameter, per meter.
    pub p: f64,
    /// Window override; the log header is used when unset.
    pub window: Option<Rect>,
    /// Raster cell size, meters.
    pub cell_size: f64,
    /// Edge index cell size, meters.
    pub index_cell: f64,
    /// Relocation radius, slide half-width and kink half-width, meters.
    pub delta: f64,
    pub weights: [f64; 13],
    /// Sampling temperature; 1 samples the posterior.
    pub temperature: f64,
    pub anneal_start: f64,
    pub anneal_end: f64,
    pub anneal_steps: u64,
    /// Annealing steps run before posterior sampling starts; 0 starts from
    /// the all-white coloring.
    pub warmup_steps: u64,
    pub burn_in: u64,
    pub steps: u64,
    pub thin: u64,
    pub seed: u64,
    pub chains: u64,
    pub laser: LaserParams,
    pub sonar: SonarParams,
    pub baseline: BaselineParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 0.1,
            window: None,
            cell_size: DEFAULT_BASELINE_CELL,
            index_cell: 0.5,
            delta: 0.25,
            weights: MoveWeights::default().as_array(),
            temperature: 1.0,
            anneal_start: 1.0,
            anneal_end: 0.25,
            anneal_steps: 200_000,
            warmup_steps: 0,
            burn_in: 50_000,
            steps: 200_000,
            thin: 100,
            seed: 0,
            chains: 1,
            laser: LaserParams::default(),
            sonar: SonarParams::default(),
            baseline: BaselineParams::default(),
        }
    }
}

macro_rules! scalar_keys {
    ($m:ident) => {
        $m! {
            "p" => p: f64,
            "cell_size" => cell_size: f64,
            "index_cell" => index_cell: f64,
            "delta" => delta: f64,
            "temperature" => temperature: f64,
            "anneal_start" => anneal_start: f64,
            "anneal_end" => anneal_end: f64,
            "anneal_steps" => anneal_steps: u64,
            "warmup_steps" => warmup_steps: u64,
            "burn_in" => burn_in: u64,
            "steps" => steps: u64,
            "thin" => thin: u64,
            "seed" => seed: u64,
            "chains" => chains: u64,
            "laser.sigma_rel" => laser.sigma_rel: f64,
            "laser.sigma_min" => laser.sigma_min: f64,
            "laser.w_gauss" => laser.w_gauss: f64,
            "laser.w_uniform" => laser.w_uniform: f64,
            "laser.w_maxrange" => laser.w_maxrange: f64,
            "sonar.corner_intercept" => sonar.corner_intercept: f64,
            "sonar.corner_distance" => sonar.corner_distance: f64,
            "sonar.face_intercept" => sonar.face_intercept: f64,
            "sonar.face_distance" => sonar.face_distance: f64,
            "sonar.face_projection" => sonar.face_projection: f64,
            "sonar.face_subtended" => sonar.face_subtended: f64,
            "sonar.sigma" => sonar.sigma: f64,
            "sonar.w_uniform" => sonar.w_uniform: f64,
            "sonar.w_exponential" => sonar.w_exponential: f64,
            "sonar.w_maxrange" => sonar.w_maxrange: f64,
            "sonar.beta" => sonar.beta: f64,
            "baseline.laser_occupied" => baseline.laser_occupied: f64,
            "baseline.laser_free" => baseline.laser_free: f64,
            "baseline.sonar_occupied" => baseline.sonar_occupied: f64,
            "baseline.sonar_free" => baseline.sonar_free: f64,
            "baseline.sonar_arc_cells" => baseline.sonar_arc_cells: f64,
        }
    };
}

macro_rules! set_scalar {
    ($($key:literal => $($f:ident).+ : $ty:ty,)*) => {
        fn set_scalar(&mut self, key: &str, value: &str) -> Option<Result<()>> {
            match key {
                $($key => Some(value.parse::<$ty>().map(|v| self.$($f).+ = v).map_err(|_| {
                    Error::Config(format!("bad value {value:?} for {key}"))
                })),)*
                _ => None,
            }
        }
    };
}

macro_rules! print_scalars {
    ($($key:literal => $($f:ident).+ : $ty:ty,)*) => {
        fn print_scalars(&self, out: &mut String) {
            $(writeln!(out, "{} = {}", $key, self.$($f).+).unwrap();)*
        }
    };
}

impl RunConfig {
    scalar_keys!(set_scalar);
    scalar_keys!(print_scalars);

    /// Set one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        if let Some(r) = self.set_scalar(key, value) {
            return r;
        }
        if key == "window" {
            self.window = if value == "auto" {
                None
            } else {
                let v: Vec<f64> = value
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Config(format!("bad window bound {t:?}"))))
                    .collect::<Result<_>>()?;
                if v.len() != 4 {
                    return Err(Error::Config("window needs min_x min_y max_x max_y, or auto".into()));
                }
                Some(Rect::new(Point2::new(v[0], v[1]), Point2::new(v[2], v[3]))?)
            };
            return Ok(());
        }
        if let Some(kind) = key.strip_prefix("weight.").and_then(MoveKind::from_name) {
            self.weights[kind as usize] = value
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))?;
            return Ok(());
        }
        Err(Error::Config(format!("unknown key {key:?}")))
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
        self.set(k.trim(), v)
    }

    /// Defaults updated by every assignment in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.apply_override(line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.print_scalars(&mut out);
        match &self.window {
            None => out.push_str("window = auto\n"),
            Some(w) => writeln!(out, "window = {} {} {} {}", w.min.x, w.min.y, w.max.x, w.max.y).unwrap(),
        }
        for k in MoveKind::ALL {
            writeln!(out, "weight.{} = {}", k.name(), self.weights[k as usize]).unwrap();
        }
        out
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        MoveWeights::new(self.weights)?;
        self.sensors().validate()?;
        let positive = [
            ("p", self.p),
            ("cell_size", self.cell_size),
            ("index_cell", self.index_cell),
            ("delta", self.delta),
            ("temperature", self.temperature),
            ("anneal_start", self.anneal_start),
            ("anneal_end", self.anneal_end),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if self.thin == 0 || self.chains == 0 {
            return Err(Error::Config("thin and chains must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sensors(&self) -> SensorParams {
        SensorParams {
            laser: self.laser,
            sonar: self.sonar,
        }
    }

    /// The configured window, falling back to `fallback`.
    pub fn window_or(&self, fallback: Option<Rect>) -> Result<Rect> {
        self.window
            .or(fallback)
            .ok_or_else(|| Error::Config("no window: set window= or add a window header to the log".into()))
    }

    pub fn grid(&self, window: Rect) -> Result<GridSpec> {
        GridSpec::new(window, self.cell_size)
    }

    /// Settings for posterior sampling at the configured temperature.
    pub fn sampler(&self, window: Rect) -> Result<SamplerConfig> {
        self.validate()?;
        let mut cfg = SamplerConfig::new(ArakParams::new(self.p, window)?);
        cfg.weights = MoveWeights::new(self.weights)?;
        cfg.delta = self.delta;
        cfg.schedule = Schedule::Constant(self.temperature);
        cfg.burn_in = self.burn_in;
        cfg.steps = self.steps;
        cfg.thin = self.thin;
        cfg.seed = self.seed;
        Ok(cfg)
    }

    /// Settings for annealing over `steps` steps.
    pub fn annealer(&self, window: Rect, steps: u64) -> Result<SamplerConfig> {
        let mut cfg = self.sampler(window)?;
        cfg.schedule = Schedule::Geometric {
            start: self.anneal_start,
            end: self.anneal_end,
        };
        cfg.burn_in = 0;
        cfg.steps = steps;
        cfg.thin = (steps / 100).max(1);
        Ok(cfg)
    }
}
