use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

/// Run `code` with the bindings importable as `polymap_py`.
fn run_python(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "polymap_py").unwrap();
        polymap_py::polymap_py(&m).unwrap();
        py.import("sys").unwrap().getattr("modules").unwrap().set_item("polymap_py", &m).unwrap();
        let globals = PyDict::new(py);
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed: {e}");
        }
    });
}

#[test]
fn survey_baseline_and_map_round_trip() {
    run_python(
        r##"
import polymap_py as pm
log, truth = pm.simulate("corridor", laser=True, sonar=True, spacing=1.5, laser_beams=30, seed=2)
lasers, sonars, points = pm.count_readings(log)
assert lasers > 0 and sonars > 0 and points == 0
base = pm.baseline(log, "cell_size = 0.1\n")
assert (base.width, base.height) == (120, 30)
assert len(base.values) == 30 and len(base.values[0]) == 120
assert base.to_pgm().startswith(b"P5\n120 30\n255\n")
assert 0.5 < base.accuracy(truth) <= 1.0
js, lp, rate = pm.estimate_map(log, "", ["anneal_steps=20000", "cell_size=0.1"])
assert rate > 0 and lp == lp
assert pm.rasterize(js, 0.1).accuracy(truth) > 0.8
assert pm.log_prior(truth, 0.1) < 0
"##,
    );
}

#[test]
fn sampling_and_closed_forms() {
    run_python(
        r##"
import math
import polymap_py as pm
black, white, samples, proposals, seconds = pm.sample("# window 0 0 1 1\n", "cell_size = 0.25\nburn_in = 0\nsteps = 1000\nthin = 10\n")
assert samples == 100 and proposals == 1000
assert all(0.0 <= v <= 1.0 for row in black.values for v in row)
assert abs(pm.expected_edge_count(0.5) - (2 + math.pi)) < 1e-12
assert abs(pm.same_color_probability(0.1, 1.0) - 0.5 * (1 + math.exp(-0.4))) < 1e-12
checks = pm.prior_checks(0.5, burn_in=100, steps=2000)
assert len(checks) == 5 and all(len(c) == 5 for c in checks)
try:
    pm.baseline("LASER 0 0.5 0.5 0 0 oops 0\n", "window = 0 0 1 1\n")
except ValueError as e:
    assert "line 1" in str(e)
else:
    raise AssertionError("bad log accepted")
try:
    pm.simulate("castle")
except ValueError:
    pass
else:
    raise AssertionError("unknown world accepted")
"##,
    );
}
