//! Python bindings. Results cross the boundary as JSON strings.

use monodromy::harness::checks::{config_nu, config_stokes};
use monodromy::harness::{run_check, to_json, RunConfig, CHECKS};
use monodromy::uplus::{markoff, UPlusPoint};
use monodromy::{Complex64, Error};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn config(json: Option<&str>) -> PyResult<RunConfig> {
    match json {
        Some(s) => RunConfig::from_json(s).map_err(to_py),
        None => Ok(RunConfig::default()),
    }
}

/// Stokes data of the configured B as JSON.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn stokes_data(config_json: Option<&str>) -> PyResult<String> {
    Ok(to_json(&config_stokes(&config(config_json)?).map_err(to_py)?))
}

/// ν(B) as JSON.
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn nu(config_json: Option<&str>) -> PyResult<String> {
    Ok(to_json(&config_nu(&config(config_json)?).map_err(to_py)?))
}

/// Run one property check and return its report as JSON.
#[pyfunction]
#[pyo3(signature = (check, config_json=None))]
fn verify(check: &str, config_json: Option<&str>) -> PyResult<String> {
    Ok(to_json(&run_check(check, &config(config_json)?).map_err(to_py)?))
}

#[pyfunction]
fn checks() -> Vec<&'static str> {
    CHECKS.to_vec()
}

/// x² + y² + z² − xyz.
#[pyfunction]
#[pyo3(name = "markoff")]
fn markoff_py(x: Complex64, y: Complex64, z: Complex64) -> PyResult<Complex64> {
    markoff(&UPlusPoint::from_coords(3, &[x, y, z]).map_err(to_py)?).map_err(to_py)
}

#[pymodule]
fn monodromy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(stokes_data, m)?)?;
    m.add_function(wrap_pyfunction!(nu, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(checks, m)?)?;
    m.add_function(wrap_pyfunction!(markoff_py, m)?)?;
    Ok(())
}
