//! Python bindings: linkage geometry, the Lyapunov solve, closed-loop runs
//! driven by the same TOML configuration as the CLI, and the built-in check
//! suite.

use nalgebra::Matrix2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use sealimb::config::RunConfigFile;
use sealimb::geometry::{self, LinkageParams};
use sealimb::sim::{metrics, run, SimRun};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Linkage geometry of the series-elastic drive.
#[pyclass]
struct Linkage {
    inner: LinkageParams,
}

#[pymethods]
impl Linkage {
    /// All arguments default to the built-in parameter set.
    #[new]
    #[pyo3(signature = (d1=None, d2=None, d3=None, d4=None, d5=None, d6=None, d7=None,
                        beta_offset=None, spring_k=None, mass=None, gravity=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        d1: Option<f64>,
        d2: Option<f64>,
        d3: Option<f64>,
        d4: Option<f64>,
        d5: Option<f64>,
        d6: Option<f64>,
        d7: Option<f64>,
        beta_offset: Option<f64>,
        spring_k: Option<f64>,
        mass: Option<f64>,
        gravity: Option<f64>,
    ) -> PyResult<Self> {
        let mut p = LinkageParams::default();
        if let Some(v) = d1 {
            p.d1 = v;
        }
        if let Some(v) = d2 {
            p.d2 = v;
        }
        if let Some(v) = d3 {
            p.d3 = v;
        }
        if let Some(v) = d4 {
            p.d4 = v;
        }
        if let Some(v) = d5 {
            p.d5 = v;
        }
        if let Some(v) = d6 {
            p.d6 = v;
        }
        if let Some(v) = d7 {
            p.d7 = v;
        }
        if let Some(v) = beta_offset {
            p.beta_offset = v;
        }
        if let Some(v) = spring_k {
            p.spring_k = v;
        }
        if let Some(v) = mass {
            p.mass = v;
        }
        if let Some(v) = gravity {
            p.gravity = v;
        }
        p.validate().map_err(err)?;
        Ok(Linkage { inner: p })
    }

    /// Actuator length at joint angle `phi` (m).
    fn lsea_length(&self, phi: f64) -> PyResult<f64> {
        geometry::lsea_length(phi, &self.inner).map_err(err)
    }

    /// `(sin_delta, sin_gamma)` at joint angle `phi`.
    fn angle_sines(&self, phi: f64) -> PyResult<(f64, f64)> {
        geometry::angle_sines(phi, &self.inner).map_err(err)
    }

    /// Gravity reaction torque about the joint (N*m).
    fn gravity_reaction_torque(&self, phi: f64) -> f64 {
        geometry::gravity_reaction_torque(phi, &self.inner)
    }

    /// Reaction force along the actuator axis (N).
    fn reaction_force(&self, phi: f64) -> PyResult<f64> {
        geometry::reaction_force(phi, &self.inner).map_err(err)
    }

    /// Transmission gain and derivatives as a dict.
    fn eval<'py>(&self, py: Python<'py>, phi: f64) -> PyResult<Bound<'py, PyDict>> {
        let ge = geometry::geometry_eval(phi, &self.inner).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("l_sea", ge.l_sea)?;
        out.set_item("sin_delta", ge.sin_delta)?;
        out.set_item("sin_gamma", ge.sin_gamma)?;
        out.set_item("g", ge.g)?;
        out.set_item("dg_dphi", ge.dg_dphi)?;
        out.set_item("d2g_dphi2", ge.d2g_dphi2)?;
        Ok(out)
    }

    fn torque_from_deflection(&self, delta: f64, phi: f64) -> PyResult<f64> {
        geometry::torque_from_deflection(delta, phi, &self.inner).map_err(err)
    }

    fn deflection_from_torque(&self, tau: f64, phi: f64) -> PyResult<f64> {
        geometry::deflection_from_torque(tau, phi, &self.inner).map_err(err)
    }
}

/// Solve `P A + A' P = -Q` for a 2x2 system.
///
/// Returns `(p, residual)` with `p` as row-major nested lists. `q` defaults
/// to the identity.
#[pyfunction]
#[pyo3(signature = (am, q=None))]
fn solve_lyapunov(
    am: [[f64; 2]; 2],
    q: Option<[[f64; 2]; 2]>,
) -> PyResult<([[f64; 2]; 2], f64)> {
    let a = Matrix2::new(am[0][0], am[0][1], am[1][0], am[1][1]);
    let qm = q
        .map(|q| Matrix2::new(q[0][0], q[0][1], q[1][0], q[1][1]))
        .unwrap_or_else(Matrix2::identity);
    let p = sealimb::lyapunov::solve_lyapunov(&a, &qm).map_err(err)?;
    let residual = sealimb::lyapunov::residual(&a, &qm, &p);
    Ok((
        [[p[(0, 0)], p[(0, 1)]], [p[(1, 0)], p[(1, 1)]]],
        residual,
    ))
}

/// The built-in configuration, fully materialized, as a TOML string.
#[pyfunction]
fn default_config() -> PyResult<String> {
    let rc = RunConfigFile::default()
        .resolve(std::path::Path::new("."))
        .map_err(err)?;
    Ok(rc.effective_toml())
}

fn run_to_dict<'py>(py: Python<'py>, outcome: &SimRun, cutoff: f64) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    let columns = PyDict::new(py);
    for name in outcome.trace.column_names() {
        columns.set_item(name, outcome.trace.column(name).map_err(err)?)?;
    }
    out.set_item("columns", columns)?;
    out.set_item("rows", outcome.trace.rows.len())?;
    out.set_item(
        "fault",
        outcome
            .fault
            .as_ref()
            .map(|f| format!("aborted at t = {}: {}", f.t, f.message)),
    )?;
    if let Ok(m) = metrics(&outcome.trace, cutoff) {
        let md = PyDict::new(py);
        md.set_item("peak_e1_post", m.peak_e1_post)?;
        md.set_item("rms_e1_post", m.rms_e1_post)?;
        md.set_item("peak_z1_overall", m.peak_z1_overall)?;
        md.set_item("peak_z1_post", m.peak_z1_post)?;
        md.set_item("peak_e2_post", m.peak_e2_post)?;
        md.set_item("settled", m.settled)?;
        out.set_item("metrics", md)?;
    } else {
        out.set_item("metrics", py.None())?;
    }
    Ok(out)
}

/// Run the closed loop described by a TOML configuration string.
///
/// An empty string selects the built-in setup. Returns a dict with the trace
/// columns, the row count, aggregate metrics and an optional fault message.
/// Relative reference-CSV paths resolve against `base_dir`.
#[pyfunction]
#[pyo3(signature = (config_toml="", base_dir="."))]
fn simulate<'py>(py: Python<'py>, config_toml: &str, base_dir: &str) -> PyResult<Bound<'py, PyDict>> {
    let rc = RunConfigFile::from_str(config_toml, "<python>")
        .map_err(err)?
        .resolve(std::path::Path::new(base_dir))
        .map_err(err)?;
    let outcome = run(&rc.scenario).map_err(err)?;
    run_to_dict(py, &outcome, rc.scenario.sim.transient_cutoff)
}

/// Run the built-in invariant suite; returns `(name, passed, detail)` rows.
#[pyfunction]
fn run_checks() -> Vec<(String, bool, String)> {
    sealimb::checks::run_all()
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn sealimb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Linkage>()?;
    m.add_function(wrap_pyfunction!(solve_lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
