//! Python bindings: simulate surveys, parse scan logs and run the mapping
//! pipelines. Logs, configurations and maps cross the boundary as text in
//! the same formats the command line reads and writes.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use polymap::coloring::Coloring;
use polymap::diagnostics::{check_prior_statistics, prior_statistics, PriorRun};
use polymap::geometry::Rect;
use polymap::io::{GreyImage, RunConfig, ScanLog};
use polymap::pipeline::{baseline_raster, estimate_map as run_map, sample_posterior};
use polymap::prior::{expected_edge_count as edge_count_of, unnormalized_log_density, ArakParams};
use polymap::sensors::{Observation, SensorParams};
use polymap::sim::{classification_accuracy, make_world, simulate_trajectory, Layout, LaserRig, SonarRig, WorldSpec};

fn py_err(e: polymap::Error) -> PyErr {
    match e {
        polymap::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Occupancy values over a grid of square cells. `values[j][i]` is the
/// cell in column `i` counted from the left and row `j` counted from the
/// bottom.
#[pyclass(name = "Raster", frozen)]
pub struct PyRaster {
    inner: polymap::raster::Raster,
}

#[pymethods]
impl PyRaster {
    #[getter]
    fn width(&self) -> u32 {
        self.inner.grid.nx()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.inner.grid.ny()
    }

    #[getter]
    fn cell_size(&self) -> f64 {
        self.inner.grid.cell_size
    }

    /// `(min_x, min_y, max_x, max_y)` in meters.
    #[getter]
    fn window(&self) -> (f64, f64, f64, f64) {
        let w = &self.inner.grid.window;
        (w.min.x, w.min.y, w.max.x, w.max.y)
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        let (nx, ny) = (self.inner.grid.nx(), self.inner.grid.ny());
        (0..ny).map(|j| (0..nx).map(|i| self.inner.get(i, j)).collect()).collect()
    }

    fn get(&self, i: u32, j: u32) -> PyResult<f64> {
        if i >= self.inner.grid.nx() || j >= self.inner.grid.ny() {
            return Err(PyValueError::new_err(format!("cell ({i}, {j}) lies outside the raster")));
        }
        Ok(self.inner.get(i, j))
    }

    /// Fraction of scored cells whose thresholded value matches the map in
    /// `truth_json`.
    #[pyo3(signature = (truth_json, threshold = 0.5))]
    fn accuracy(&self, truth_json: &str, threshold: f64) -> PyResult<f64> {
        let truth = Coloring::from_json(truth_json).map_err(py_err)?;
        classification_accuracy(&self.inner, &truth, threshold).map_err(py_err)
    }

    /// Binary PGM image, dark where occupied.
    fn to_pgm<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &GreyImage::from_occupancy(&self.inner).to_bytes())
    }

    fn __repr__(&self) -> String {
        format!("Raster({}x{}, cell_size={})", self.width(), self.height(), self.cell_size())
    }
}

fn raster(inner: polymap::raster::Raster) -> PyRaster {
    PyRaster { inner }
}

/// Resolve a run configuration from configuration-file text and
/// `key=value` overrides.
pub fn resolve_config(config: &str, overrides: &[String]) -> polymap::Result<RunConfig> {
    let mut cfg = RunConfig::parse(config)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Configuration, observations and window for a run over `log_text`.
pub fn load(log_text: &str, config: &str, overrides: &[String]) -> polymap::Result<(RunConfig, Vec<Observation>, Rect)> {
    let cfg = resolve_config(config, overrides)?;
    let log = ScanLog::parse(log_text)?;
    let window = cfg.window_or(log.window)?;
    Ok((cfg, log.observations(), window))
}

/// Simulate a survey of a synthetic building. Returns the scan log text and
/// the true map as JSON.
#[pyfunction]
#[pyo3(signature = (world = "corridor", laser = true, sonar = false, spacing = 0.75, seed = 0, world_seed = 0, laser_beams = 180))]
pub fn simulate(
    world: &str,
    laser: bool,
    sonar: bool,
    spacing: f64,
    seed: u64,
    world_seed: u64,
    laser_beams: u32,
) -> PyResult<(String, String)> {
    let layout = Layout::from_name(world).ok_or_else(|| PyValueError::new_err(format!("unknown world {world:?}")))?;
    let w = make_world(&WorldSpec {
        seed: world_seed,
        ..WorldSpec::new(layout)
    })
    .map_err(py_err)?;
    let laser = laser.then(|| LaserRig {
        beams: laser_beams,
        ..Default::default()
    });
    let sonar = sonar.then(SonarRig::default);
    let traj = w.trajectory(spacing, laser, sonar);
    let records = simulate_trajectory(&w.truth, &traj, &SensorParams::default(), seed).map_err(py_err)?;
    let log = ScanLog::from_records(Some(*w.truth.window()), records).map_err(py_err)?;
    Ok((log.to_text(), w.truth.to_json().map_err(py_err)?))
}

/// Counts of laser, sonar and point readings in a scan log.
#[pyfunction]
pub fn count_readings(log_text: &str) -> PyResult<(usize, usize, usize)> {
    let log = ScanLog::parse(log_text).map_err(py_err)?;
    let mut n = (0, 0, 0);
    for o in log.observations() {
        match o {
            Observation::Laser(_) => n.0 += 1,
            Observation::Sonar(_) => n.1 += 1,
            Observation::Point(_) => n.2 += 1,
        }
    }
    Ok(n)
}

/// Occupancy-grid map of the readings.
#[pyfunction]
#[pyo3(signature = (log_text, config = "", overrides = Vec::new()))]
pub fn baseline(py: Python<'_>, log_text: &str, config: &str, overrides: Vec<String>) -> PyResult<PyRaster> {
    let (cfg, obs, window) = load(log_text, config, &overrides).map_err(py_err)?;
    py.detach(|| baseline_raster(&cfg, window, &obs)).map(raster).map_err(py_err)
}

/// Posterior sampling. Returns `(p_black, p_cell_white, samples,
/// proposals, seconds)`.
#[pyfunction]
#[pyo3(signature = (log_text, config = "", overrides = Vec::new()))]
pub fn sample(
    py: Python<'_>,
    log_text: &str,
    config: &str,
    overrides: Vec<String>,
) -> PyResult<(PyRaster, PyRaster, u64, u64, f64)> {
    let (cfg, obs, window) = load(log_text, config, &overrides).map_err(py_err)?;
    let run = py.detach(|| sample_posterior(&cfg, window, &obs)).map_err(py_err)?;
    Ok((raster(run.p_black), raster(run.p_cell_white), run.samples, run.proposals, run.seconds))
}

/// Annealed map. Returns `(map_json, log_posterior, proposals_per_second)`.
#[pyfunction]
#[pyo3(signature = (log_text, config = "", overrides = Vec::new()))]
pub fn estimate_map(py: Python<'_>, log_text: &str, config: &str, overrides: Vec<String>) -> PyResult<(String, f64, f64)> {
    let (cfg, obs, window) = load(log_text, config, &overrides).map_err(py_err)?;
    let run = py.detach(|| run_map(&cfg, window, &obs)).map_err(py_err)?;
    let json = run.report.best.to_json().map_err(py_err)?;
    Ok((json, run.report.best_log_posterior, run.proposals_per_second()))
}

/// Rasterize a JSON map: 1 where the cell center is black.
#[pyfunction]
pub fn rasterize(map_json: &str, cell_size: f64) -> PyResult<PyRaster> {
    let c = Coloring::from_json(map_json).map_err(py_err)?;
    let grid = polymap::geometry::GridSpec::new(*c.window(), cell_size).map_err(py_err)?;
    Ok(raster(polymap::raster::Raster::from_coloring(&c, grid)))
}

/// Unnormalized log prior density of a JSON map with scale parameter `p`.
#[pyfunction]
pub fn log_prior(map_json: &str, p: f64) -> PyResult<f64> {
    let c = Coloring::from_json(map_json).map_err(py_err)?;
    let a = ArakParams::new(p, *c.window()).map_err(py_err)?;
    Ok(unnormalized_log_density(&c, &a))
}

/// Expected number of edges of a prior sample in the unit square.
#[pyfunction]
pub fn expected_edge_count(p: f64) -> PyResult<f64> {
    let unit = Rect::from_size(1.0, 1.0).map_err(py_err)?;
    edge_count_of(&ArakParams::new(p, unit).map_err(py_err)?).map_err(py_err)
}

/// Probability that two points `d` apart share a color under the prior.
#[pyfunction]
pub fn same_color_probability(p: f64, d: f64) -> f64 {
    polymap::prior::same_color_probability(p, d)
}

/// Run prior chains on the unit square and compare their statistics with
/// the closed forms. Returns `(name, observed, expected, tolerance, pass)`
/// per check.
#[pyfunction]
#[pyo3(signature = (p, burn_in = 500_000, steps = 2_000_000, seed = 0, chains = 1))]
pub fn prior_checks(
    py: Python<'_>,
    p: f64,
    burn_in: u64,
    steps: u64,
    seed: u64,
    chains: u64,
) -> PyResult<Vec<(String, f64, f64, f64, bool)>> {
    let run = PriorRun {
        seed,
        chains,
        ..PriorRun::unit_square(p, burn_in, steps)
    };
    let stats = py.detach(|| prior_statistics(&run)).map_err(py_err)?;
    Ok(check_prior_statistics(&stats, &run.window)
        .into_iter()
        .map(|c| (c.name, c.observed, c.expected, c.tolerance, c.pass))
        .collect())
}

#[pymodule]
pub fn polymap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRaster>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(count_readings, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_map, m)?)?;
    m.add_function(wrap_pyfunction!(rasterize, m)?)?;
    m.add_function(wrap_pyfunction!(log_prior, m)?)?;
    m.add_function(wrap_pyfunction!(expected_edge_count, m)?)?;
    m.add_function(wrap_pyfunction!(same_color_probability, m)?)?;
    m.add_function(wrap_pyfunction!(prior_checks, m)?)?;
    Ok(())
}
