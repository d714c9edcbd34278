//! Python bindings: a thin layer over the ppblow core crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ppblow::blowup;
use ppblow::fracint::{self, FractionalSpec};
use ppblow::solver::{self, Bc, Control, Profile, ProblemSpec, RadialGrid};
use ppblow::testfn;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_profile(kind: &str, amp: f64, width: f64) -> PyResult<Profile> {
    match kind {
        "zero" => Ok(Profile::Zero),
        "constant" => Ok(Profile::Constant { value: amp }),
        "gaussian" => Ok(Profile::Gaussian { amp, width }),
        other => Err(PyValueError::new_err(format!(
            "unknown profile kind {other:?}; expected zero, constant or gaussian"
        ))),
    }
}

/// Left Riemann-Liouville integral of uniformly sampled data.
#[pyfunction]
fn left_fractional_integral(samples: Vec<f64>, gamma: f64, dt: f64) -> PyResult<f64> {
    let spec = FractionalSpec::new(gamma).map_err(err)?;
    fracint::left_rl_integral(&samples, spec, dt).map_err(err)
}

/// Closed-form right integral of (1 - t/T)^m.
#[pyfunction]
fn right_fractional_poly(m: u32, gamma: f64, t_end: f64, t: f64) -> PyResult<f64> {
    fracint::rl_right_poly_closed_form(m, gamma, t_end, t).map_err(err)
}

/// Critical exponent N/(N-2) (inf for N = 1, 2).
#[pyfunction]
fn p_critical(n_dim: u32) -> PyResult<f64> {
    testfn::p_critical(n_dim).map_err(err)
}

/// Fujita exponent 1 + 2/N.
#[pyfunction]
fn p_fujita(n_dim: u32) -> PyResult<f64> {
    testfn::p_fujita(n_dim).map_err(err)
}

/// Subcritical scaling integral I1, I2 or I3.
#[pyfunction]
fn scaling_integral(
    which: u8,
    t_horizon: f64,
    r_scale: f64,
    p: f64,
    gamma: f64,
    n_dim: u32,
) -> PyResult<f64> {
    let params = testfn::SubcriticalParams { t_horizon, r_scale, p, gamma, n_dim };
    testfn::compute_i(params, testfn::Which::from_index(which).map_err(err)?).map_err(err)
}

/// Critical scaling integral J1, J2 or J3 at p = N/(N-2).
#[pyfunction]
fn critical_integral(which: u8, t_horizon: f64, r_outer: f64, n_dim: u32) -> PyResult<f64> {
    let params = testfn::CriticalParams { t_horizon, r_outer, n_dim };
    testfn::compute_j(params, testfn::Which::from_index(which).map_err(err)?).map_err(err)
}

/// One radial evolution run; returns a report dict.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (
    k, p, gamma, n_dim, r_max, n_r, horizon,
    dt0 = 1e-2, threshold = 1e8,
    omega_kind = "gaussian", omega_amp = 1.0, omega_width = 1.0,
    u0_kind = "zero", u0_amp = 0.0, u0_width = 1.0,
))]
fn simulate(
    py: Python<'_>,
    k: f64,
    p: f64,
    gamma: f64,
    n_dim: u32,
    r_max: f64,
    n_r: usize,
    horizon: f64,
    dt0: f64,
    threshold: f64,
    omega_kind: &str,
    omega_amp: f64,
    omega_width: f64,
    u0_kind: &str,
    u0_amp: f64,
    u0_width: f64,
) -> PyResult<PyObject> {
    let grid = RadialGrid::new(n_dim, r_max, n_r, Bc::Neumann).map_err(err)?;
    let spec = ProblemSpec {
        k,
        p,
        gamma,
        reaction: 1.0,
        omega: parse_profile(omega_kind, omega_amp, omega_width)?,
        u0: parse_profile(u0_kind, u0_amp, u0_width)?,
    };
    let control = Control { dt0, horizon, threshold, ..Control::default() };
    let (traj, report) = solver::run(&spec, &grid, &control).map_err(err)?;
    let dict = pyo3::types::PyDict::new_bound(py);
    dict.set_item("outcome", report.outcome.to_string())?;
    dict.set_item("t_star", report.t_star_estimate)?;
    dict.set_item("fit_exponent", report.fit_exponent)?;
    dict.set_item("steps", traj.steps)?;
    dict.set_item("reached_horizon", traj.reached_horizon)?;
    dict.set_item("diverged", traj.diverged)?;
    let series: Vec<(f64, f64)> = traj.norm_series();
    dict.set_item("times", series.iter().map(|s| s.0).collect::<Vec<_>>())?;
    dict.set_item("sup_norms", series.iter().map(|s| s.1).collect::<Vec<_>>())?;
    Ok(dict.into())
}

/// Blow-up time extrapolation from a (t, sup_norm) series.
#[pyfunction]
fn estimate_t_star(times: Vec<f64>, sup_norms: Vec<f64>, p: f64) -> PyResult<f64> {
    if times.len() != sup_norms.len() {
        return Err(PyValueError::new_err("times and sup_norms lengths differ"));
    }
    let series: Vec<(f64, f64)> = times.into_iter().zip(sup_norms).collect();
    blowup::estimate_t_star(&series, p).map(|f| f.t_star).map_err(err)
}

#[pymodule]
fn ppblow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(left_fractional_integral, m)?)?;
    m.add_function(wrap_pyfunction!(right_fractional_poly, m)?)?;
    m.add_function(wrap_pyfunction!(p_critical, m)?)?;
    m.add_function(wrap_pyfunction!(p_fujita, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_integral, m)?)?;
    m.add_function(wrap_pyfunction!(critical_integral, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_t_star, m)?)?;
    Ok(())
}
