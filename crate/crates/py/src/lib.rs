//! Python bindings. Reports are returned as plain dicts and lists.

use mch_core::evolution::{run_evolution, EvolutionConfig, PerturbationKind, StepControl};
use mch_core::functionals::{dq_dk_closed_form, functional_report, q_closed_form};
use mch_core::params::validate_parameters;
use mch_core::profile::{construct_profile, GridOverride};
use mch_core::spectral::{spectral_report, vk_closed_form};
use mch_core::sweep::{default_k_range, k_values, run_sweep_with};
use mch_core::verify::{verify_all as verify_all_core, VerifyOptions};
use mch_core::{WaveParameters, WaveProfile};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(
    mchwave,
    NumericalError,
    PyRuntimeError,
    "A computation failed (non-convergence, blow-up, positivity loss)."
);

fn to_py_err(e: mch_core::Error) -> PyErr {
    match e {
        mch_core::Error::InvalidParameter { .. } => PyValueError::new_err(e.to_string()),
        other => NumericalError::new_err(other.to_string()),
    }
}

/// Round-trips through JSON so that serde field names become dict keys.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn wave(c: f64, k: f64, dx: Option<f64>, half_length: Option<f64>) -> PyResult<WaveProfile> {
    let params = WaveParameters::new(c, k).map_err(to_py_err)?;
    let grid = GridOverride { dx, half_length }.resolve(&params);
    construct_profile(&params, &grid).map_err(to_py_err)
}

#[derive(Serialize)]
struct ProfileData<'a> {
    parameters: &'a WaveParameters,
    dx: f64,
    half_length: f64,
    crest: f64,
    tail_error: f64,
    xi: Vec<f64>,
    phi: &'a [f64],
    phi_xi: &'a [f64],
    mu: &'a [f64],
    mu_xi: &'a [f64],
}

/// Derived constants of the wave `(c, k)`; raises `ValueError` outside the window.
#[pyfunction]
#[pyo3(name = "validate_parameters")]
fn validate_parameters_py<'py>(py: Python<'py>, c: f64, k: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &validate_parameters(c, k).map_err(to_py_err)?)
}

/// Profile samples on `[-L, L]`.
#[pyfunction]
#[pyo3(name = "construct_profile", signature = (c, k, dx=None, half_length=None))]
fn construct_profile_py<'py>(
    py: Python<'py>,
    c: f64,
    k: f64,
    dx: Option<f64>,
    half_length: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = wave(c, k, dx, half_length)?;
    let data = ProfileData {
        parameters: p.params(),
        dx: p.dx(),
        half_length: p.half_length(),
        crest: p.crest(),
        tail_error: p.tail_error(),
        xi: p.xi(),
        phi: p.phi(),
        phi_xi: p.phi_xi(),
        mu: p.mu(),
        mu_xi: p.mu_xi(),
    };
    to_py(py, &data)
}

#[pyfunction]
#[pyo3(signature = (c, k, dx=None, half_length=None))]
fn functionals<'py>(
    py: Python<'py>,
    c: f64,
    k: f64,
    dx: Option<f64>,
    half_length: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = wave(c, k, dx, half_length)?;
    to_py(py, &functional_report(&p).map_err(to_py_err)?)
}

#[pyfunction]
#[pyo3(signature = (c, k, dx=None, half_length=None))]
fn spectrum<'py>(
    py: Python<'py>,
    c: f64,
    k: f64,
    dx: Option<f64>,
    half_length: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = wave(c, k, dx, half_length)?;
    let report = py.detach(|| spectral_report(&p)).map_err(to_py_err)?;
    to_py(py, &report)
}

/// `(Q, dQ/dk, ((c - k^2)^2 / 4c) dQ/dk)` from the closed forms.
#[pyfunction]
fn closed_forms(c: f64, k: f64) -> PyResult<(f64, f64, f64)> {
    let q = q_closed_form(c, k).map_err(to_py_err)?;
    let dq = dq_dk_closed_form(c, k).map_err(to_py_err)?;
    Ok((q, dq, vk_closed_form(c, k).map_err(to_py_err)?))
}

/// Evolves the perturbed wave; returns the summary and per-sample diagnostics.
#[pyfunction]
#[pyo3(signature = (c, k, n=4096, l_dom=None, t_end=10.0, dt_max=0.01, perturbation="gaussian", eps=0.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn evolve<'py>(
    py: Python<'py>,
    c: f64,
    k: f64,
    n: usize,
    l_dom: Option<f64>,
    t_end: f64,
    dt_max: f64,
    perturbation: &str,
    eps: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let perturbation: PerturbationKind = perturbation.parse().map_err(to_py_err)?;
    let config = EvolutionConfig {
        c,
        k,
        n,
        l_dom,
        perturbation,
        eps,
        seed,
        control: StepControl { t_end, dt_max, ..StepControl::default() },
    };
    let run = py.detach(|| run_evolution(&config)).map_err(to_py_err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("summary", to_py(py, &run.summary)?)?;
    out.set_item("samples", to_py(py, &run.trajectory.samples)?)?;
    out.set_item("x", run.trajectory.terminal.x())?;
    out.set_item("m", run.trajectory.terminal.m().to_vec())?;
    Ok(out.into_any())
}

/// Rows across `k_count` values of `k`; the range defaults to the window minus a margin.
#[pyfunction]
#[pyo3(signature = (c, k_min=None, k_max=None, k_count=21, dx=None, half_length=None))]
fn sweep<'py>(
    py: Python<'py>,
    c: f64,
    k_min: Option<f64>,
    k_max: Option<f64>,
    k_count: usize,
    dx: Option<f64>,
    half_length: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let (lo, hi) = default_k_range(c);
    let ks = k_values(c, k_min.unwrap_or(lo), k_max.unwrap_or(hi), k_count).map_err(to_py_err)?;
    let table = py.detach(|| run_sweep_with(c, &ks, GridOverride { dx, half_length })).map_err(to_py_err)?;
    to_py(py, &table)
}

/// Runs every check at `(c, k)` and returns the verdict.
#[pyfunction]
#[pyo3(signature = (c, k, evolution=true, n=4096))]
fn verify_all<'py>(py: Python<'py>, c: f64, k: f64, evolution: bool, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let verdict = py.detach(|| verify_all_core(c, k, &VerifyOptions { evolution, n })).map_err(to_py_err)?;
    to_py(py, &verdict)
}

#[pymodule]
fn mchwave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(validate_parameters_py, m)?)?;
    m.add_function(wrap_pyfunction!(construct_profile_py, m)?)?;
    m.add_function(wrap_pyfunction!(functionals, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(closed_forms, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
